//! Cost breakdown of the protocols by primitive.
//!
//! Each category is timed on the active backend; the per-protocol totals
//! are then assembled from the parts the same way the cost formulas do
//! (CN: `T_IBE + 2T_H + 2T_ES + T_DH`; NA: `T_IBE + 3T_H`; NA with
//! tracing: `T_KPE + T_KPD + T_LIN + 8T_EXP + 3T_P + 6T_H + 2w T_mul +
//! (2w+2) T_H`). Only the selection family depends on `w`.

use std::hint::black_box;
use std::time::Instant;

use rand::RngCore;

use crate::crypto::{
    dh_keygen, dh_shared, hash_h, prf_f0, sym_encrypt, BilinearContext, F0Tag, Nonce, SymKey,
};
use crate::dualenc::{enc_proof, enc_verify, kp_decrypt, kp_encrypt, kp_keygen, lin_encrypt, lin_keygen};
use crate::handshake::{g_select, g_select_verify, u_select, u_select_verify, Group, GroupDirectory};
use crate::ibe::{ibe_decrypt, ibe_encrypt, ibe_extract, ibe_setup_with, IBE_MSG_LEN};

/// The primitive categories, each reported once.
pub const CATEGORIES: [&str; 10] = [
    "T_IBE", "T_DH", "T_ES", "T_H", "T_KPE", "T_KPD", "T_LIN", "T_EXP", "T_P", "T_mul",
];

pub const SELECTION_ROWS: [&str; 4] = ["gSelect", "gSelectVer", "uSelect", "uSelectVer"];

pub const WS: [usize; 2] = [10, 50];

pub const CSV_HEADER: &str = "category,w,reps,mean_ms";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub category: String,
    pub w: Option<usize>,
    pub reps: u32,
    pub mean_ms: f64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{:.6}",
            self.category,
            self.w.map(|w| w.to_string()).unwrap_or_default(),
            self.reps,
            self.mean_ms
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn get(&self, category: &str, w: Option<usize>) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.category == category && r.w == w)
            .map(|r| r.mean_ms)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.to_csv());
            s.push('\n');
        }
        s
    }

    /// `|composed - direct| / direct` for the network-absent step.
    pub fn na_composition_gap(&self) -> Option<f64> {
        let composed = self.get("NA-GD2C", None)?;
        let direct = self.get("NA-GD2C-direct", None)?;
        Some((composed - direct).abs() / direct)
    }
}

/// Mean wall time of `f` in milliseconds over `reps` runs (after one
/// warm-up call).
fn time_ms(reps: u32, mut f: impl FnMut()) -> f64 {
    f();
    let start = Instant::now();
    for _ in 0..reps {
        f();
    }
    start.elapsed().as_secs_f64() * 1e3 / reps as f64
}

fn synthetic_directory(w: usize, per_group: usize) -> GroupDirectory {
    let groups = (0..2 * w)
        .map(|g| Group {
            gid: format!("g{g:03}").into_bytes(),
            members: (0..per_group).map(|u| format!("g{g:03}-u{u}").into_bytes()).collect(),
        })
        .collect();
    GroupDirectory::new(w, groups).expect("two groups per chunk")
}

pub fn run_bench(ctx: &BilinearContext, reps: u32, rng: &mut dyn RngCore) -> BenchReport {
    let reps = reps.max(1);
    let mut rows = Vec::new();
    let mut push = |category: &str, w: Option<usize>, mean_ms: f64| {
        rows.push(BenchRow {
            category: category.into(),
            w,
            reps,
            mean_ms,
        })
    };

    let (params, msk) = ibe_setup_with(ctx.clone(), rng);
    let id = b"bench-identity";
    let sk = ibe_extract(&params, &msk, id).expect("non-empty identity");
    let msg = [7u8; IBE_MSG_LEN];
    let ct = ibe_encrypt(&params, id, &msg, rng).expect("valid message");
    let key = SymKey::random(rng);
    let dh = dh_keygen(ctx, rng);
    let peer = dh_keygen(ctx, rng).public;
    let kp = kp_keygen(ctx, rng);
    let lin = lin_keygen(ctx, rng);
    let m = ctx.random_element(rng);
    let (kct, y) = kp_encrypt(ctx, &kp.public, &m, rng);
    let (lct, eph) = lin_encrypt(ctx, &lin.public, &m, rng);
    let proof = enc_proof(ctx, &kct, &lct, &eph, &y, &kp.public, &lin.public, rng);
    let a = ctx.random_element(rng);
    let b = ctx.random_element(rng);
    let k = ctx.random_scalar(rng);
    let (ga, gb) = (ctx.random_scalar(rng), ctx.random_scalar(rng));

    let t_ibe = time_ms(reps, || {
        black_box(ibe_encrypt(&params, id, &msg, rng).ok());
    });
    let t_h = time_ms(reps * 50, || {
        black_box(hash_h(&msg));
    });
    push("T_IBE", None, t_ibe);
    push(
        "T_DH",
        None,
        time_ms(reps, || {
            black_box(dh_shared(ctx, &dh.secret, &peer).ok());
        }),
    );
    push(
        "T_ES",
        None,
        time_ms(reps * 50, || {
            black_box(sym_encrypt(&key, &msg, rng));
        }),
    );
    push("T_H", None, t_h);
    push(
        "T_KPE",
        None,
        time_ms(reps, || {
            black_box(kp_encrypt(ctx, &kp.public, &m, rng));
        }),
    );
    push(
        "T_KPD",
        None,
        time_ms(reps, || {
            black_box(kp_decrypt(ctx, &kp.x, &kct));
        }),
    );
    push(
        "T_LIN",
        None,
        time_ms(reps, || {
            black_box(lin_encrypt(ctx, &lin.public, &m, rng));
        }),
    );
    push(
        "T_EXP",
        None,
        time_ms(reps, || {
            black_box(ctx.exp(&a, &k));
        }),
    );
    push(
        "T_P",
        None,
        time_ms(reps, || {
            black_box(ctx.pair(&a, &b));
        }),
    );
    push(
        "T_mul",
        None,
        time_ms(reps * 20, || {
            black_box(ctx.mul(&a, &b));
        }),
    );
    push(
        "IBE_dec",
        None,
        time_ms(reps, || {
            black_box(ibe_decrypt(&params, &sk, &ct).ok());
        }),
    );
    push(
        "EncProof",
        None,
        time_ms(reps, || {
            black_box(enc_proof(ctx, &kct, &lct, &eph, &y, &kp.public, &lin.public, rng));
        }),
    );
    push(
        "EncVer",
        None,
        time_ms(reps, || {
            black_box(enc_verify(ctx, &kct, &lct, &proof, &kp.public, &lin.public));
        }),
    );

    for w in WS {
        let dir = synthetic_directory(w, 4);
        let (n_u, n_v) = (Nonce::random(rng), Nonce::random(rng));
        let gsel = g_select(ctx, &dir, 0, 1, &n_u, &n_v, rng).expect("valid slot");
        let s = g_select_verify(ctx, &dir, &n_u, &n_v, &gsel).expect("honest selection");
        let usel = u_select(ctx, &dir, &s, 0, s[0], 2, &n_u, &n_v, rng).expect("valid member");
        push(
            "gSelect",
            Some(w),
            time_ms(reps, || {
                black_box(g_select(ctx, &dir, 0, 1, &n_u, &n_v, rng).ok());
            }),
        );
        push(
            "gSelectVer",
            Some(w),
            time_ms(reps, || {
                black_box(g_select_verify(ctx, &dir, &n_u, &n_v, &gsel).ok());
            }),
        );
        push(
            "uSelect",
            Some(w),
            time_ms(reps, || {
                black_box(u_select(ctx, &dir, &s, 0, s[0], 2, &n_u, &n_v, rng).ok());
            }),
        );
        push(
            "uSelectVer",
            Some(w),
            time_ms(reps, || {
                black_box(u_select_verify(ctx, &dir, &n_u, &n_v, &s, &usel).ok());
            }),
        );
    }

    // The network-absent step without tracing, timed as one unit.
    let direct = time_ms(reps, || {
        black_box(ibe_encrypt(&params, id, &msg, rng).ok());
        for tag in [F0Tag::Sigma0, F0Tag::Sigma1, F0Tag::SessionKey] {
            black_box(prf_f0(ctx, &ga, &gb, tag));
        }
    });

    let get = |c: &str| {
        rows.iter()
            .find(|r| r.category == c)
            .map(|r| r.mean_ms)
            .expect("measured above")
    };
    let cn = t_ibe + 2.0 * t_h + 2.0 * get("T_ES") + get("T_DH");
    let na = t_ibe + 3.0 * t_h;
    let trace_core = get("T_KPE")
        + get("T_KPD")
        + get("T_LIN")
        + 8.0 * get("T_EXP")
        + 3.0 * get("T_P")
        + 6.0 * t_h;
    let t_mul = get("T_mul");
    let mut composed = vec![
        ("CN-GD2C", None, cn),
        ("NA-GD2C", None, na),
        ("NA-GD2C-direct", None, direct),
    ];
    for w in WS {
        let wf = w as f64;
        composed.push((
            "NA-GD2C-trace",
            Some(w),
            trace_core + 2.0 * wf * t_mul + (2.0 * wf + 2.0) * t_h,
        ));
    }
    rows.extend(composed.into_iter().map(|(c, w, mean_ms)| BenchRow {
        category: c.into(),
        w,
        reps,
        mean_ms,
    }));
    BenchReport { rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn every_category_once_and_only_selection_depends_on_w() {
        let ctx = BilinearContext::toy();
        let r = run_bench(&ctx, 2, &mut ChaCha20Rng::seed_from_u64(1));
        for c in CATEGORIES {
            assert_eq!(r.rows.iter().filter(|row| row.category == c).count(), 1, "{c}");
        }
        for row in r.rows.iter().filter(|row| row.w.is_some()) {
            assert!(
                SELECTION_ROWS.contains(&row.category.as_str()) || row.category == "NA-GD2C-trace",
                "{}",
                row.category
            );
        }
        for c in SELECTION_ROWS {
            for w in WS {
                assert!(r.get(c, Some(w)).is_some());
            }
        }
        assert!(r.rows.iter().all(|row| row.mean_ms > 0.0));
        assert_eq!(r.to_csv().lines().count(), r.rows.len() + 1);
    }
}
