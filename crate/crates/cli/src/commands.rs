use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use graad::asr::{
    asr_sweep, monotonicity_audit, parse_grid, GridPoint, Mode, SweepRow, SWEEP_HEADER,
};
use graad::bench::run_bench;
use graad::crypto::{hash_h, Backend, BilinearContext};
use graad::protocols::{
    register_ue, revoke_ue, run_cn, run_na, trace_session, Fault, FaultAction, NaView, Selector,
    SessionKey, TraceEvidence, Transcript, UeDevice,
};
use rand::{RngCore, SeedableRng};

use crate::workspace::{valid_name, Workspace};
use crate::{usage, RunMode, Security};

fn backend(s: Security) -> Backend {
    match s {
        Security::Toy => Backend::Toy,
        Security::Standard => Backend::Standard,
    }
}

pub fn init(
    root: &Path,
    security: Security,
    m: usize,
    w: usize,
    seed: u64,
    groups: Option<Vec<String>>,
    force: bool,
) -> Result<u8> {
    let names = groups.unwrap_or_else(|| (0..m).map(|i| format!("group-{i}")).collect());
    let ws = Workspace::create(root, backend(security), m, w, seed, names, force)?;
    println!(
        "initialised {} ({} backend, m = {m}, w = {w})",
        ws.root.display(),
        ws.backend.name()
    );
    Ok(0)
}

pub fn register(root: &Path, name: &str, group: &str) -> Result<u8> {
    if !valid_name(name) {
        return Err(usage(format!("bad device name {name:?}")));
    }
    let mut ws = Workspace::open(root)?;
    if ws.has_ue(name) {
        bail!("device {name:?} is already registered");
    }
    let gid = ws.group_named(group)?;
    let mut rng = ws.next_rng();
    let mut id = [0u8; 16];
    rng.fill_bytes(&mut id);
    let creds = register_ue(&mut ws.hss, &mut ws.prose, id, &gid, 0, &mut rng)?;
    ws.save_ue(name, &UeDevice::new(creds.clone()))?;
    ws.save()?;
    println!("{name} {}", hex::encode(creds.label()));
    Ok(0)
}

pub fn revoke(root: &Path, name: &str) -> Result<u8> {
    let mut ws = Workspace::open(root)?;
    let dev = ws.load_ue(name)?;
    revoke_ue(&mut ws.prose, &dev.creds.label()).with_context(|| format!("revoking {name}"))?;
    ws.save()?;
    println!("revoked {name}; crl size {}", ws.prose.crl.len());
    Ok(0)
}

pub fn directory(root: &Path) -> Result<u8> {
    let ws = Workspace::open(root)?;
    print!("{}", ws.prose.dir.to_text());
    Ok(0)
}

fn selector(s: &str) -> Result<Selector> {
    s.parse::<Selector>().map_err(|e| usage(format!("bad step selector {s:?}: {e}")))
}

fn parse_faults(tamper: &[String], drop: &[String], replay: &[String]) -> Result<Vec<Fault>> {
    let mut out = Vec::new();
    for t in tamper {
        let mut parts = t.split(':');
        let target = selector(parts.next().unwrap_or_default())?;
        let byte = parts
            .next()
            .and_then(|b| b.strip_prefix("byte"))
            .and_then(|b| b.parse().ok())
            .ok_or_else(|| usage(format!("bad --tamper {t:?}: expected stepN[.k]:byteK[:maskXX]")))?;
        let mask = match parts.next() {
            None => 0x01,
            Some(m) => m
                .strip_prefix("mask")
                .and_then(|m| u8::from_str_radix(m, 16).ok())
                .filter(|m| *m != 0)
                .ok_or_else(|| usage(format!("bad mask in --tamper {t:?}")))?,
        };
        out.push(Fault {
            target,
            action: FaultAction::Tamper { byte, mask },
        });
    }
    for d in drop {
        out.push(Fault {
            target: selector(d)?,
            action: FaultAction::Drop,
        });
    }
    for r in replay {
        let (sel, file) = r
            .split_once(':')
            .ok_or_else(|| usage(format!("bad --replay {r:?}: expected stepN[.k]:FILE")))?;
        let target = selector(sel)?;
        let text = fs::read_to_string(file).with_context(|| format!("reading {file}"))?;
        let bytes = Transcript::recorded_messages(&text)
            .into_iter()
            .find(|(tag, _)| target.matches(*tag))
            .map(|(_, b)| b)
            .ok_or_else(|| usage(format!("{file} has no message for {target}")))?;
        out.push(Fault {
            target,
            action: FaultAction::Replace(bytes),
        });
    }
    Ok(out)
}

fn fingerprint(k: &SessionKey) -> String {
    hex::encode(&hash_h(&k.0).0[..8])
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    root: &Path,
    mode: RunMode,
    a: &str,
    b: &str,
    tamper: &[String],
    drop: &[String],
    replay: &[String],
    transcript: Option<PathBuf>,
) -> Result<u8> {
    if a == b {
        return Err(usage("a device cannot run a session with itself"));
    }
    let faults = parse_faults(tamper, drop, replay)?;
    let mut ws = Workspace::open(root)?;
    let mut dev_a = ws.load_ue(a)?;
    let mut dev_b = ws.load_ue(b)?;
    let mut rng = ws.next_rng();
    let tag = match mode {
        RunMode::Cn => "cn",
        RunMode::Na => "na",
    };
    let path = transcript
        .unwrap_or_else(|| ws.transcripts().join(format!("{:04}-{tag}-{a}-{b}.log", ws.counter())));

    let (log, keys, accepted, evidence, abort) = match mode {
        RunMode::Cn => {
            let out = run_cn(&ws.hss, &ws.prose, &mut dev_a, &mut dev_b, faults, &mut rng);
            let abort = out.first_abort().map(|x| x.to_string());
            (out.transcript.to_text(), (out.key_i.clone(), out.key_j.clone()), out.accepted(), None, abort)
        }
        RunMode::Na => {
            let dir = ws.prose.publish().map_err(|e| {
                anyhow::anyhow!("directory is not publishable ({e}); every group needs a member")
            })?;
            let view = NaView {
                params: &ws.hss.params,
                lin: ws.prose.lin_public(),
                dir: &dir,
                crl: &ws.prose.crl,
            };
            let out = run_na(view, &dev_a.creds, view, &dev_b.creds, faults, &mut rng);
            let abort = (!out.accepted()).then(|| "session aborted".to_string());
            (out.transcript.to_text(), (out.key_u.clone(), out.key_v.clone()), out.accepted(), out.evidence.clone(), abort)
        }
    };

    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, &log).with_context(|| format!("writing {}", path.display()))?;
    ws.save_ue(a, &dev_a)?;
    ws.save_ue(b, &dev_b)?;
    ws.save()?;

    let mut out = std::io::stdout().lock();
    writeln!(out, "transcript: {}", path.display())?;
    if accepted {
        let (ka, kb) = keys;
        writeln!(out, "accepted")?;
        writeln!(out, "key {a}: {}", fingerprint(ka.as_ref().expect("accepted")))?;
        writeln!(out, "key {b}: {}", fingerprint(kb.as_ref().expect("accepted")))?;
        if let Some(ev) = evidence {
            let ev_path = path.with_extension("evidence");
            fs::write(&ev_path, ev.to_text(ws.hss.ctx()))?;
            writeln!(out, "evidence: {}", ev_path.display())?;
        }
        Ok(0)
    } else {
        writeln!(out, "aborted: {}", abort.unwrap_or_else(|| "keys differ".into()))?;
        Ok(1)
    }
}

pub fn trace(root: &Path, file: &Path) -> Result<u8> {
    let ws = Workspace::open(root)?;
    let mut text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    if !text.starts_with("graad-evidence") {
        // A transcript: its evidence sits next to it.
        let ev = file.with_extension("evidence");
        text = fs::read_to_string(&ev)
            .map_err(|_| usage(format!("{} is not an evidence file", file.display())))?;
    }
    let ctx = ws.hss.ctx();
    let ev = TraceEvidence::from_text(ctx, &text).map_err(|e| anyhow::anyhow!("malformed evidence: {e}"))?;
    match trace_session(ctx, &ws.prose, &ev) {
        Ok(t) => {
            println!("gamma: {}", hex::encode(&t.gamma));
            println!("delta: {}", hex::encode(&t.delta));
            for (role, label, i) in [("U", &ev.label_u, t.i_u), ("V", &ev.label_v, t.i_v)] {
                let revoked = if ws.prose.crl.contains(label) { " (revoked)" } else { "" };
                println!(
                    "{role}: group {} (index {i}) label {}{revoked}",
                    ws.group_name(i as usize),
                    hex::encode(label)
                );
            }
            Ok(0)
        }
        Err(e) => {
            println!("rejected: {e}");
            Ok(1)
        }
    }
}

#[derive(Args, Debug)]
pub struct AsrArgs {
    #[arg(long, default_value = "na")]
    mode: String,
    /// Mean inter-arrival time over service time.
    #[arg(long = "c-t", default_value_t = 2.0)]
    c_t: f64,
    /// Mean D2D residence time over service time.
    #[arg(long = "c-rd", default_value_t = 11.091)]
    c_rd: f64,
    /// Mean eNB residence time over service time (network-covered only).
    #[arg(long = "c-r")]
    c_r: Option<f64>,
    /// Closed form only (the default).
    #[arg(long, conflicts_with_all = ["sim", "sweep"])]
    analytic: bool,
    /// Also simulate.
    #[arg(long)]
    sim: bool,
    /// Grid file of `mode,c_t,c_rd[,c_r]` lines; simulated when --sim is given.
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    arrivals: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Queued requests leave when their residence time runs out.
    #[arg(long)]
    reneging: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn asr(args: &AsrArgs) -> Result<u8> {
    let mode: Mode = args.mode.parse().map_err(|_| usage(format!("unknown mode {:?}", args.mode)))?;
    let points = match &args.sweep {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_grid(&text).map_err(|e| usage(e.to_string()))?
        }
        None => {
            let p = match mode {
                Mode::Na => GridPoint::na(args.c_t, args.c_rd),
                Mode::Cn => GridPoint::cn(
                    args.c_t,
                    args.c_rd,
                    args.c_r.ok_or_else(|| usage("--mode cn needs --c-r"))?,
                ),
            };
            p.model().validate().map_err(|e| usage(e.to_string()))?;
            vec![p]
        }
    };
    let arrivals = if args.sim { args.arrivals } else { 0 };
    if args.sim && arrivals == 0 {
        return Err(usage("--arrivals must be at least 1"));
    }
    let rows = asr_sweep(&points, arrivals, args.seed, args.reneging)?;
    let csv = csv(&rows);
    match &args.out {
        Some(p) => fs::write(p, &csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    if args.sweep.is_some() {
        let bad = monotonicity_audit(&rows);
        if !bad.is_empty() {
            eprintln!("monotonicity audit: FAILED for row pairs {bad:?}");
            return Ok(1);
        }
        eprintln!("monotonicity audit: ok");
    }
    Ok(0)
}

fn csv(rows: &[SweepRow]) -> String {
    let mut s = format!("{SWEEP_HEADER}\n");
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

pub fn bench(root: &Path, reps: u32, security: Option<Security>) -> Result<u8> {
    let backend = match security {
        Some(s) => backend(s),
        None => Workspace::open(root)?.backend,
    };
    let ctx = BilinearContext::new(backend);
    // Timings are not reproducible anyway.
    let mut rng = rand_chacha::ChaCha20Rng::from_entropy();
    let report = run_bench(&ctx, reps, &mut rng);
    print!("{}", report.to_csv());
    if let Some(gap) = report.na_composition_gap() {
        eprintln!("NA composed vs direct: {:.1}% apart", gap * 100.0);
    }
    Ok(0)
}
