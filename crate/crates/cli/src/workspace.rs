//! On-disk state: one text file per authority plus one per device.
//!
//! ```text
//! <root>/meta.txt        backend, m, w, seed, rng counter, group names
//! <root>/hss.txt         IBE parameters, master key, subscribers
//! <root>/prose.txt       K_P, Linear keypair, group map
//! <root>/directory.txt   group directory (empty groups allowed)
//! <root>/crl.txt         revocation list
//! <root>/ues/<name>.txt  device credentials
//! <root>/transcripts/    session logs and evidence
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use graad::codec::KvDoc;
use graad::crypto::Backend;
use graad::handshake::GroupDirectory;
use graad::protocols::{Crl, Hss, Id128, Prose, UeDevice};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::{corrupt, usage};

pub struct Workspace {
    pub root: PathBuf,
    pub backend: Backend,
    pub seed: u64,
    counter: u64,
    /// Display names in directory order.
    pub groups: Vec<(String, Id128)>,
    pub hss: Hss,
    pub prose: Prose,
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 64
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| corrupt(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

impl Workspace {
    pub fn create(
        root: &Path,
        backend: Backend,
        m: usize,
        w: usize,
        seed: u64,
        names: Vec<String>,
        force: bool,
    ) -> Result<Self> {
        if root.join("meta.txt").exists() && !force {
            return Err(usage(format!(
                "workspace {} already exists (use --force to overwrite)",
                root.display()
            )));
        }
        if w == 0 || m == 0 || !m.is_multiple_of(w) {
            return Err(usage(format!("w must divide m (m = {m}, w = {w})")));
        }
        if names.len() != m {
            return Err(usage(format!("{} group names for m = {m}", names.len())));
        }
        if let Some(bad) = names.iter().find(|n| !valid_name(n)) {
            return Err(usage(format!("bad group name {bad:?}")));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let hss = Hss::setup(backend, &mut rng);
        let gids: Vec<Id128> = (0..m)
            .map(|_| {
                let mut g = [0u8; 16];
                rand::RngCore::fill_bytes(&mut rng, &mut g);
                g
            })
            .collect();
        let prose = Prose::setup(hss.ctx(), w, &gids, &mut rng)?;
        if root.exists() && force {
            for sub in ["ues", "transcripts"] {
                let p = root.join(sub);
                if p.exists() {
                    fs::remove_dir_all(&p).with_context(|| format!("clearing {}", p.display()))?;
                }
            }
        }
        fs::create_dir_all(root.join("ues"))?;
        fs::create_dir_all(root.join("transcripts"))?;
        let ws = Self {
            root: root.to_path_buf(),
            backend,
            seed,
            counter: 0,
            groups: names.into_iter().zip(gids).collect(),
            hss,
            prose,
        };
        ws.save()?;
        Ok(ws)
    }

    pub fn open(root: &Path) -> Result<Self> {
        if !root.join("meta.txt").exists() {
            return Err(corrupt(format!(
                "no workspace at {} (run `graad init` first)",
                root.display()
            )));
        }
        let bad = |what: &str, e: &dyn std::fmt::Display| corrupt(format!("{what}: {e}"));
        let meta = KvDoc::from_text("workspace", &read(&root.join("meta.txt"))?)
            .map_err(|e| bad("meta.txt", &e))?;
        let backend: Backend = meta.get_parsed("backend").map_err(|e| bad("meta.txt", &e))?;
        let seed = meta.get_parsed("seed").map_err(|e| bad("meta.txt", &e))?;
        let counter = meta.get_parsed("rng-counter").map_err(|e| bad("meta.txt", &e))?;
        let mut groups = Vec::new();
        for line in meta.all("group") {
            let (name, gid) = line
                .split_once(':')
                .ok_or_else(|| corrupt("meta.txt: bad group line"))?;
            let gid = hex::decode(gid)
                .ok()
                .and_then(|b| Id128::try_from(b).ok())
                .ok_or_else(|| corrupt("meta.txt: bad group id"))?;
            groups.push((name.to_string(), gid));
        }

        let hss_doc = KvDoc::from_text("hss", &read(&root.join("hss.txt"))?).map_err(|e| bad("hss.txt", &e))?;
        let hss = Hss::from_doc(&hss_doc).map_err(|e| bad("hss.txt", &e))?;
        if hss.ctx().backend() != backend {
            return Err(corrupt("hss.txt: backend differs from meta.txt"));
        }
        let dir = GroupDirectory::roster_from_text(&read(&root.join("directory.txt"))?)
            .map_err(|e| bad("directory.txt", &e))?;
        let crl = Crl::from_text(&read(&root.join("crl.txt"))?).map_err(|e| bad("crl.txt", &e))?;
        let prose_doc =
            KvDoc::from_text("prose", &read(&root.join("prose.txt"))?).map_err(|e| bad("prose.txt", &e))?;
        let prose = Prose::from_parts(hss.ctx(), &prose_doc, dir, crl).map_err(|e| bad("prose.txt", &e))?;
        if prose.dir.m() != groups.len()
            || groups
                .iter()
                .zip(prose.dir.groups())
                .any(|((_, gid), g)| g.gid != gid.as_slice())
        {
            return Err(corrupt("directory.txt does not match the groups in meta.txt"));
        }
        Ok(Self {
            root: root.to_path_buf(),
            backend,
            seed,
            counter,
            groups,
            hss,
            prose,
        })
    }

    pub fn save(&self) -> Result<()> {
        let mut meta = KvDoc::new();
        meta.push("backend", self.backend.name())
            .push("m", self.prose.dir.m().to_string())
            .push("w", self.prose.dir.w().to_string())
            .push("seed", self.seed.to_string())
            .push("rng-counter", self.counter.to_string());
        for (name, gid) in &self.groups {
            meta.push("group", format!("{name}:{}", hex::encode(gid)));
        }
        let ctx = self.hss.ctx();
        write(&self.root.join("meta.txt"), &meta.to_text("workspace"))?;
        write(&self.root.join("hss.txt"), &self.hss.to_doc().to_text("hss"))?;
        write(&self.root.join("prose.txt"), &self.prose.to_doc(ctx).to_text("prose"))?;
        write(&self.root.join("directory.txt"), &self.prose.dir.to_text())?;
        write(&self.root.join("crl.txt"), &self.prose.crl.to_text())
    }

    /// A fresh deterministic stream for the next randomised command.
    pub fn next_rng(&mut self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.counter + 1);
        self.counter += 1;
        rng
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    pub fn group_named(&self, name: &str) -> Result<Id128> {
        self.groups
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, g)| *g)
            .ok_or_else(|| usage(format!("no group named {name:?}")))
    }

    pub fn group_name(&self, index: usize) -> &str {
        self.groups.get(index).map_or("?", |(n, _)| n.as_str())
    }

    fn ue_path(&self, name: &str) -> PathBuf {
        self.root.join("ues").join(format!("{name}.txt"))
    }

    pub fn has_ue(&self, name: &str) -> bool {
        self.ue_path(name).exists()
    }

    pub fn load_ue(&self, name: &str) -> Result<UeDevice> {
        if !valid_name(name) {
            return Err(usage(format!("bad device name {name:?}")));
        }
        let path = self.ue_path(name);
        if !path.exists() {
            bail!("no device named {name:?}");
        }
        let doc = KvDoc::from_text("ue", &read(&path)?).map_err(|e| corrupt(format!("{name}: {e}")))?;
        UeDevice::from_doc(self.hss.ctx(), &doc).map_err(|e| corrupt(format!("{name}: {e}")))
    }

    pub fn save_ue(&self, name: &str, dev: &UeDevice) -> Result<()> {
        write(&self.ue_path(name), &dev.to_doc(self.hss.ctx()).to_text("ue"))
    }

    pub fn transcripts(&self) -> PathBuf {
        self.root.join("transcripts")
    }
}
