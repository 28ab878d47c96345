#![allow(dead_code)]

use graad::crypto::Backend;
use graad::protocols::{
    register_ue, run_cn, run_na, CnOutcome, Crl, Fault, Hss, Id128, NaOutcome, NaView, Prose,
    UeCredentials, UeDevice,
};
use graad::handshake::GroupDirectory;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// HSS, ProSe and `per_group` devices in each of `m` groups split over `w` chunks.
pub struct World {
    pub hss: Hss,
    pub prose: Prose,
    pub dir: GroupDirectory,
    pub devices: Vec<UeDevice>,
    pub rng: ChaCha20Rng,
}

impl World {
    pub fn new(seed: u64, m: usize, w: usize, per_group: usize) -> Self {
        Self::with_sizes(seed, w, &vec![per_group; m])
    }

    /// Devices are numbered group by group, `sizes[g]` of them in group `g`.
    pub fn with_sizes(seed: u64, w: usize, sizes: &[usize]) -> Self {
        let m = sizes.len();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut hss = Hss::setup(Backend::Toy, &mut rng);
        let gids: Vec<Id128> = (0..m)
            .map(|_| {
                let mut g = [0u8; 16];
                rng.fill_bytes(&mut g);
                g
            })
            .collect();
        let mut prose = Prose::setup(hss.ctx(), w, &gids, &mut rng).unwrap();
        let mut devices = Vec::new();
        for (gid, &n) in gids.iter().zip(sizes) {
            for _ in 0..n {
                let mut id = [0u8; 16];
                rng.fill_bytes(&mut id);
                let c = register_ue(&mut hss, &mut prose, id, gid, 0, &mut rng).unwrap();
                devices.push(UeDevice::new(c));
            }
        }
        let dir = prose.publish().unwrap();
        Self { hss, prose, dir, devices, rng }
    }

    pub fn creds(&self, i: usize) -> &UeCredentials {
        &self.devices[i].creds
    }

    pub fn view(&self) -> NaView<'_> {
        NaView {
            params: &self.hss.params,
            lin: self.prose.lin_public(),
            dir: &self.dir,
            crl: &self.prose.crl,
        }
    }

    pub fn crl(&self) -> &Crl {
        &self.prose.crl
    }

    /// A network-covered session between devices `i` and `j`.
    pub fn cn(&mut self, i: usize, j: usize, faults: Vec<Fault>, rng: &mut dyn RngCore) -> CnOutcome {
        assert_ne!(i, j);
        let World { hss, prose, devices, .. } = self;
        let (lo, hi) = devices.split_at_mut(i.max(j));
        let (a, b) = if i < j { (&mut lo[i], &mut hi[0]) } else { (&mut hi[0], &mut lo[j]) };
        run_cn(hss, prose, a, b, faults, rng)
    }

    /// A network-absent session between devices `i` and `j`, both using the
    /// published directory and CRL.
    pub fn na(&self, i: usize, j: usize, faults: Vec<Fault>, rng: &mut dyn RngCore) -> NaOutcome {
        run_na(self.view(), self.creds(i), self.view(), self.creds(j), faults, rng)
    }
}
