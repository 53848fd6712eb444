//! Mixed quiver settings, their membership spaces, and character grading
//! checks.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, CMat};
use crate::quiver::Quiver;
use crate::validation::ValidationReport;
use crate::{QuiverError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupSymbol {
    GL,
    SL,
    O,
    SO,
    Sp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowSymbol {
    M,
    SPlus,
    SMinus,
    LPlus,
    LMinus,
}

impl GroupSymbol {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "GL" => Self::GL,
            "SL" => Self::SL,
            "O" => Self::O,
            "SO" => Self::SO,
            "Sp" => Self::Sp,
            _ => return None,
        })
    }
}

impl ArrowSymbol {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "M" => Self::M,
            "S+" => Self::SPlus,
            "S-" => Self::SMinus,
            "L+" => Self::LPlus,
            "L-" => Self::LMinus,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct MixedQuiverSetting {
    pub quiver: Arc<Quiver>,
    pub n: Vec<usize>,
    pub g_sym: Vec<GroupSymbol>,
    pub h_sym: Vec<ArrowSymbol>,
    pub sigma_v: Vec<usize>,
    pub sigma_a: Vec<usize>,
}

/// Checks the seven defining conditions. Violation codes are
/// `mixed-1` … `mixed-7`; a non-involutive σ is reported as `mixed-sigma`.
pub fn validate_mixed_setting(ms: &MixedQuiverSetting) -> ValidationReport {
    use ArrowSymbol::*;
    use GroupSymbol::*;
    let q = &ms.quiver;
    let mut rep = ValidationReport::new();
    let (nv, na) = (q.vertex_count(), q.arrow_count());
    if ms.n.len() != nv || ms.g_sym.len() != nv || ms.sigma_v.len() != nv {
        rep.push(
            "mixed-shape",
            "dimension, group symbol or σ data does not cover every vertex",
        );
        return rep;
    }
    if ms.h_sym.len() != na || ms.sigma_a.len() != na {
        rep.push(
            "mixed-shape",
            "arrow symbol or σ data does not cover every arrow",
        );
        return rep;
    }
    let vid = |i: usize| q.vertices()[i].as_str();
    let aid = |a: usize| q.arrows()[a].id.as_str();
    for i in 0..nv {
        let s = ms.sigma_v[i];
        if s >= nv || ms.sigma_v[s] != i {
            rep.push(
                "mixed-sigma",
                format!("σ is not an involution at vertex {:?}", vid(i)),
            );
        }
    }
    for a in 0..na {
        let s = ms.sigma_a[a];
        if s >= na || ms.sigma_a[s] != a {
            rep.push(
                "mixed-sigma",
                format!("σ is not an involution at arrow {:?}", aid(a)),
            );
        }
    }
    for i in 0..nv {
        if ms.g_sym[i] == Sp && ms.n[i] % 2 == 1 {
            rep.push(
                "mixed-1",
                format!(
                    "(1) g = Sp at {:?} needs even dimension, got {}",
                    vid(i),
                    ms.n[i]
                ),
            );
        }
    }
    for a in 0..na {
        let (t, h) = (q.tail(a), q.head(a));
        let sym = ms.h_sym[a];
        if sym != M && ms.n[t] != ms.n[h] {
            rep.push(
                "mixed-2",
                format!(
                    "(2) arrow {:?} with symbol other than M needs n_t = n_h",
                    aid(a)
                ),
            );
        }
        if t == h && matches!(sym, SPlus | SMinus) && !matches!(ms.g_sym[t], O | SO) {
            rep.push(
                "mixed-3",
                format!(
                    "(3) loop {:?} with S± needs g = O or SO at its vertex",
                    aid(a)
                ),
            );
        }
        if t == h && matches!(sym, LPlus | LMinus) && ms.g_sym[t] != Sp {
            rep.push(
                "mixed-4",
                format!("(4) loop {:?} with L± needs g = Sp at its vertex", aid(a)),
            );
        }
    }
    for i in 0..nv {
        let s = ms.sigma_v[i];
        if s < nv && ms.n[s] != ms.n[i] {
            rep.push(
                "mixed-5",
                format!("(5) n differs between {:?} and its σ-image", vid(i)),
            );
        }
        if matches!(ms.g_sym[i], O | SO | Sp) && s != i {
            rep.push(
                "mixed-6",
                format!(
                    "(6) vertex {:?} with g = O, SO or Sp must be fixed by σ",
                    vid(i)
                ),
            );
        }
    }
    for a in 0..na {
        let (t, h) = (q.tail(a), q.head(a));
        let sym = ms.h_sym[a];
        if t != h && sym != M && (ms.sigma_v[t] != h || !matches!(sym, SPlus | SMinus)) {
            rep.push(
                "mixed-7",
                format!(
                    "(7) non-loop {:?} with symbol other than M needs σ(t) = h and S±",
                    aid(a)
                ),
            );
        }
    }
    rep
}

/// Membership residual of `a` in the space named by `h`.
pub fn membership_residual(h: ArrowSymbol, a: &CMat) -> f64 {
    match h {
        ArrowSymbol::M => 0.0,
        ArrowSymbol::SPlus => linalg::fro(&(a.transpose() - a)),
        ArrowSymbol::SMinus => linalg::fro(&(a.transpose() + a)),
        ArrowSymbol::LPlus | ArrowSymbol::LMinus => {
            if a.nrows() % 2 == 1 || a.nrows() != a.ncols() {
                return f64::INFINITY;
            }
            let aj = a * linalg::symplectic_j(a.nrows());
            let sym = if h == ArrowSymbol::LPlus {
                ArrowSymbol::SPlus
            } else {
                ArrowSymbol::SMinus
            };
            membership_residual(sym, &aj)
        }
    }
}

/// Deterministic sample of `M(n)`, `S±(n)` or `L±(n)`.
pub fn sample_mixed_block(h: ArrowSymbol, n: usize, seed: u64) -> Result<CMat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = linalg::random_gaussian(&mut rng, n, n);
    let half = linalg::c(0.5, 0.0);
    Ok(match h {
        ArrowSymbol::M => x,
        ArrowSymbol::SPlus => (&x + x.transpose()) * half,
        ArrowSymbol::SMinus => (&x - x.transpose()) * half,
        ArrowSymbol::LPlus | ArrowSymbol::LMinus => {
            if n % 2 == 1 {
                return Err(QuiverError::OddBlockSize(n));
            }
            let b = if h == ArrowSymbol::LPlus {
                (&x + x.transpose()) * half
            } else {
                (&x - x.transpose()) * half
            };
            // J^{-1} = −J
            b * (-linalg::symplectic_j(n))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradingGroup {
    O,
    Sp,
    SL,
}

/// Characters are additive exponent vectors with multiplicities.
pub fn validate_character_grading(
    chars: &[(Vec<i64>, usize)],
    group: GradingGroup,
) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let len = chars.first().map(|c| c.0.len()).unwrap_or(0);
    if chars.iter().any(|c| c.0.len() != len) {
        rep.push("grading-length", "exponent vectors have different lengths");
        return rep;
    }
    match group {
        GradingGroup::O | GradingGroup::Sp => {
            let mut mult: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
            for (c, m) in chars {
                *mult.entry(c.clone()).or_default() += m;
            }
            for (c, m) in &mult {
                let neg: Vec<i64> = c.iter().map(|x| -x).collect();
                let mn = mult.get(&neg).copied().unwrap_or(0);
                if mn != *m && c < &neg {
                    rep.push(
                        "grading-inverse",
                        format!("character {c:?} has multiplicity {m} but its inverse has {mn}"),
                    );
                } else if mn != *m && mn == 0 {
                    rep.push(
                        "grading-inverse",
                        format!("character {c:?} is not closed under inverse"),
                    );
                }
            }
        }
        GradingGroup::SL => {
            let mut sum = vec![0i64; len];
            for (c, m) in chars {
                for (s, x) in sum.iter_mut().zip(c) {
                    *s += *m as i64 * x;
                }
            }
            if sum.iter().any(|&s| s != 0) {
                rep.push("grading-sum", format!("weighted sum nonzero: {sum:?}"));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting(
        q: Quiver,
        n: Vec<usize>,
        g: Vec<GroupSymbol>,
        h: Vec<ArrowSymbol>,
    ) -> MixedQuiverSetting {
        let (nv, na) = (q.vertex_count(), q.arrow_count());
        MixedQuiverSetting {
            quiver: Arc::new(q),
            n,
            g_sym: g,
            h_sym: h,
            sigma_v: (0..nv).collect(),
            sigma_a: (0..na).collect(),
        }
    }

    #[test]
    fn odd_symplectic_dimension() {
        let ms = setting(
            Quiver::from_edges(&["v"], &[]),
            vec![3],
            vec![GroupSymbol::Sp],
            vec![],
        );
        let rep = validate_mixed_setting(&ms);
        assert!(rep.has("mixed-1"));
    }

    #[test]
    fn symmetric_loop_on_symplectic_vertex() {
        let ms = setting(
            Quiver::jordan(),
            vec![2],
            vec![GroupSymbol::Sp],
            vec![ArrowSymbol::SPlus],
        );
        let rep = validate_mixed_setting(&ms);
        assert!(rep.has("mixed-3"));
        assert!(!rep.has("mixed-1"));
    }

    #[test]
    fn plain_setting_is_valid() {
        let ms = setting(
            Quiver::kronecker(2),
            vec![2, 5],
            vec![GroupSymbol::GL; 2],
            vec![ArrowSymbol::M; 2],
        );
        assert!(validate_mixed_setting(&ms).is_valid());
    }

    #[test]
    fn sampled_blocks_are_members() {
        use ArrowSymbol::*;
        let a = sample_mixed_block(SMinus, 2, 1).unwrap();
        assert!(membership_residual(SMinus, &a) <= 1e-12);
        assert_eq!(a[(0, 0)], linalg::ZERO);
        for h in [M, SPlus, SMinus, LPlus, LMinus] {
            let a = sample_mixed_block(h, 4, 7).unwrap();
            assert!(membership_residual(h, &a) <= 1e-12, "{h:?}");
        }
        assert_eq!(sample_mixed_block(SPlus, 1, 3).unwrap().shape(), (1, 1));
        assert!(matches!(
            sample_mixed_block(LPlus, 3, 0),
            Err(QuiverError::OddBlockSize(3))
        ));
        assert_eq!(
            sample_mixed_block(LPlus, 2, 5).unwrap(),
            sample_mixed_block(LPlus, 2, 5).unwrap()
        );
    }

    #[test]
    fn grading_examples() {
        let ok = validate_character_grading(&[(vec![1], 1), (vec![-1], 1)], GradingGroup::SL);
        assert!(ok.is_valid());
        let bad = validate_character_grading(&[(vec![1], 2), (vec![-1], 1)], GradingGroup::SL);
        assert!(bad.to_string().contains("weighted sum nonzero"));
        let open = validate_character_grading(&[(vec![1], 1), (vec![2], 1)], GradingGroup::O);
        assert!(open.has("grading-inverse"));
        let closed = validate_character_grading(
            &[(vec![1, 0], 2), (vec![-1, 0], 2), (vec![0, 0], 3)],
            GradingGroup::Sp,
        );
        assert!(closed.is_valid());
        let unbalanced =
            validate_character_grading(&[(vec![1], 2), (vec![-1], 1)], GradingGroup::O);
        assert_eq!(unbalanced.violations.len(), 1);
    }
}
