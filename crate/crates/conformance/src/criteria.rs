use std::collections::{BTreeMap, BTreeSet};

use jlres::characters::{self, orbit_of, CharExp};
use jlres::regularize::{self, RegularizeOptions};
use jlres::{green_traces, linking, tame_transfer, FieldLevel, TowerParams};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::oracle::{self, as_u64};
use crate::{Config, Mutation, Scale, Tally};

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn members_u64(o: &jlres::GaloisOrbit) -> Vec<u64> {
    o.members().iter().map(as_u64).collect()
}

/// Orbit representatives at `Q^deg − 1` by direct search.
fn oracle_orbits(q: u64, m: u64) -> Vec<Vec<u64>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for x in 0..m {
        if seen.contains(&x) {
            continue;
        }
        let o = oracle::orbit(x, q, m);
        seen.extend(o.iter().copied());
        out.push(o);
    }
    out
}

/// Essentially tame shapes swept by the rectifier checks.
pub fn tame_shapes(scale: Scale) -> Vec<TowerParams> {
    let (qs, e_max, f_max, m_max, d_max): (&[(u64, u64)], u64, u64, u64, u64) = match scale {
        Scale::Small => (&[(2, 2), (3, 3), (5, 5), (7, 7), (3, 9)], 4, 2, 3, 4),
        Scale::Full => (
            &[(2, 2), (2, 4), (3, 3), (3, 9), (5, 5), (7, 7), (11, 11)],
            6,
            3,
            4,
            6,
        ),
    };
    let mut out = Vec::new();
    for &(p, q) in qs {
        for e in 1..=e_max {
            for f in 1..=f_max {
                for m in 1..=m_max {
                    for d in 1..=d_max {
                        if let Ok(t) = TowerParams::new(p, q, e, f, m, d) {
                            if t.is_essentially_tame() && tame_transfer::rectifier_terms(&t).is_ok()
                            {
                                out.push(t);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn small_top(t: &TowerParams, max_m: u64) -> Option<u64> {
    let m = (t.big_q as u128).checked_pow(t.n_prime as u32)? - 1;
    (m <= max_m as u128).then_some(m as u64)
}

fn oracle_mu(t: &TowerParams) -> Option<u64> {
    let s = oracle::shape(t.p, t.q, t.e_ef, t.f_ef, t.m, t.d)?;
    oracle::rectifier_exponent(t.p, &s).to_u64()
}

pub fn zsigmondy(cfg: &Config, t: &mut Tally) {
    let (b_max, r_max) = match cfg.scale {
        Scale::Small => (30, 24),
        Scale::Full => (36, 26),
    };
    for b in 2..=b_max {
        for r in 2..=r_max {
            let expected = match oracle::primitive_prime(b, r) {
                Ok(e) => e,
                Err(msg) => {
                    t.fail(msg);
                    continue;
                }
            };
            let exception = (b == 2 && r == 6) || (r == 2 && (b + 1).is_power_of_two());
            t.check(expected.is_none() == exception, || {
                format!("oracle disagrees with the exception list at ({b}, {r})")
            });
            let Some(got) = t.ok(regularize::zsigmondy_prime(&big(b), r), || {
                format!("zsigmondy({b}, {r})")
            }) else {
                continue;
            };
            t.check(got.as_ref().map(|g| &g.0) == expected.as_ref(), || {
                format!(
                    "zsigmondy({b}, {r}) = {:?}, oracle {:?}",
                    got.as_ref().map(|g| g.0.to_string()),
                    expected
                )
            });
            if let Some((_, cert)) = &got {
                t.check(cert.verify(), || {
                    format!("certificate for ({b}, {r}) does not verify")
                });
            }
        }
    }
}

fn level_for(m: u64) -> FieldLevel {
    let (q, d) = match m {
        7 => (2, 3),
        24 => (5, 2),
        48 => (7, 2),
        80 => (3, 4),
        242 => (3, 5),
        255 => (2, 8),
        624 => (5, 4),
        728 => (3, 6),
        1023 => (2, 10),
        _ => unreachable!("no level registered for M = {m}"),
    };
    FieldLevel::new(q, d).unwrap()
}

pub fn ell_regular(cfg: &Config, t: &mut Tally) {
    let ms: &[u64] = match cfg.scale {
        Scale::Small => &[7, 24, 48, 242, 728],
        Scale::Full => &[7, 24, 48, 80, 242, 255, 624, 728, 1023],
    };
    for &m in ms {
        let level = level_for(m);
        for ell in oracle::prime_divisors(m) {
            for a in 0..m {
                let found = oracle::regular_part_candidates(a, ell, m);
                let alpha = CharExp::from_u64(level.clone(), a);
                let Some(reg) = t.ok(characters::ell_regular_part(&alpha, &big(ell)), || {
                    format!("M={m} a={a}")
                }) else {
                    continue;
                };
                t.check(found == [as_u64(reg.exponent())], || {
                    format!(
                        "M={m} a={a} ℓ={ell}: oracle {found:?}, library {}",
                        reg.exponent()
                    )
                });
            }
        }
    }
}

pub fn linking(cfg: &Config, t: &mut Tally) {
    let levels: &[(u64, u64)] = match cfg.scale {
        Scale::Small => &[(2, 2), (2, 3), (3, 2), (4, 3), (5, 2)],
        Scale::Full => &[
            (2, 2),
            (2, 3),
            (3, 2),
            (4, 3),
            (5, 2),
            (2, 6),
            (3, 4),
            (7, 2),
            (8, 2),
        ],
    };
    for &(q, n) in levels {
        let level = FieldLevel::new(q, n).unwrap();
        let m = q.pow(n as u32) - 1;
        let orbits = oracle_orbits(q, m);
        let ctx = || format!("level ({q}, {n})");
        if let Some(blocks) = t.ok(linking::linked_partition(&level, cfg.exec), ctx) {
            t.check(blocks.len() == 1, || {
                format!("({q}, {n}): {} blocks", blocks.len())
            });
            let got: BTreeSet<Vec<u64>> = blocks.iter().flatten().map(members_u64).collect();
            let want: BTreeSet<Vec<u64>> = orbits.iter().cloned().collect();
            t.check(got == want, || {
                format!("({q}, {n}): partition does not cover the orbits")
            });
        }
        for src in &orbits {
            for dst in &orbits {
                let from = CharExp::from_u64(level.clone(), src[0]);
                let to = CharExp::from_u64(level.clone(), dst[0]);
                let Some(chain) = t.ok(linking::build_link_chain(&from, &to), || {
                    format!("chain {src:?} → {dst:?}")
                }) else {
                    continue;
                };
                t.check(chain.verify().unwrap_or(false), || {
                    format!("({q}, {n}): chain {} → {} fails verify", src[0], dst[0])
                });
                // independent replay
                let mut cur = src.clone();
                let mut ok = true;
                for step in &chain.steps {
                    let ell = as_u64(&step.ell);
                    let (b, a) = (members_u64(&step.before), members_u64(&step.after));
                    let reg = |o: &[u64]| oracle::orbit(oracle::regular_part(o[0], ell, m), q, m);
                    ok &= oracle::is_prime(ell) && m % ell == 0 && b == cur && reg(&b) == reg(&a);
                    cur = a;
                }
                ok &= &cur == dst;
                t.check(ok, || {
                    format!(
                        "({q}, {n}): chain {} → {} rejected by replay",
                        src[0], dst[0]
                    )
                });
            }
        }
    }
}

pub fn regularization(cfg: &Config, t: &mut Tally) {
    let levels: &[(u64, u64, u64)] = match cfg.scale {
        Scale::Small => &[(2, 2, 2), (3, 3, 2), (2, 2, 3)],
        Scale::Full => &[
            (2, 2, 2),
            (3, 3, 2),
            (2, 2, 3),
            (2, 4, 2),
            (5, 5, 2),
            (2, 2, 4),
        ],
    };
    for &(p, q, n) in levels {
        let params = TowerParams::new(p, q, 1, 1, 1, n).unwrap();
        let level = params.top_level().unwrap();
        let m = q.pow(n as u32) - 1;
        for orbit in oracle_orbits(q, m) {
            let alpha = CharExp::from_u64(level.clone(), orbit[0]);
            let f = orbit.len() as u64;
            let ctx = || format!("({q}, {n}) α={}", orbit[0]);
            let Some(lift) = t.ok(
                regularize::regularize(&alpha, &params, RegularizeOptions::default()),
                ctx,
            ) else {
                continue;
            };
            let a = lift.a;
            // expected a and ℓ from the oracle
            let b = q.pow(f as u32);
            let mut exp_a = 7;
            while exp_a * n <= 6 * f {
                exp_a += 2;
            }
            let exp_ell = loop {
                match oracle::primitive_prime(b, exp_a * n / f) {
                    Ok(Some(l)) => break Some(l),
                    Ok(None) => exp_a += 2,
                    Err(_) => break None,
                }
            };
            t.check(a == exp_a && Some(&lift.ell) == exp_ell.as_ref(), || {
                format!(
                    "{}: (a, ℓ) = ({a}, {}), oracle ({exp_a}, {exp_ell:?})",
                    ctx(),
                    lift.ell
                )
            });
            let ell = as_u64(&lift.ell);
            let top = a * n;
            let ms = q.pow(top as u32) - 1;
            let beta = as_u64(lift.beta.exponent());
            let alpha_star = as_u64(lift.alpha_star.exponent());
            let xi = as_u64(lift.xi.exponent());
            t.check(a % 2 == 1 && a >= 7 && top > 6 * f, || {
                format!("{}: bad blow-up {a}", ctx())
            });
            t.check(lift.beta.modulus() == &big(ms), || {
                format!("{}: β at wrong level", ctx())
            });
            t.check(oracle::orbit(beta, q, ms).len() as u64 == top, || {
                format!("{}: β not e-regular", ctx())
            });
            t.check(alpha_star == oracle::mulmod(orbit[0], ms / m, ms), || {
                format!("{}: α* wrong", ctx())
            });
            t.check(
                oracle::order(xi, ms) == ell && (xi + alpha_star) % ms == beta,
                || format!("{}: β ≠ ξα*", ctx()),
            );
            let reg = |x: u64| oracle::orbit(oracle::regular_part(x, ell, ms), q, ms);
            t.check(reg(beta) == reg(alpha_star), || {
                format!("{}: β ≢ α* mod ℓ", ctx())
            });
            t.check(
                oracle::is_prime(ell)
                    && ell != p
                    && ell != 2
                    && (b - 1) % ell != 0
                    && oracle::ord_mod(b, ell) == top / f,
                || format!("{}: ℓ = {ell} is not a primitive odd prime", ctx()),
            );
            t.check(lift.verify(p).is_ok(), || {
                format!("{}: lift does not self-verify", ctx())
            });
            if (q, n, orbit[0]) == (2, 2, 0) {
                t.check(ell == 43 && a == 7, || {
                    format!("worked example gives ℓ = {ell}, a = {a}")
                });
            }
        }
    }
}

pub fn rectifier(cfg: &Config, t: &mut Tally) {
    let shapes = tame_shapes(cfg.scale);
    t.check(shapes.len() >= 50, || {
        format!("only {} shapes in the sweep", shapes.len())
    });
    for params in &shapes {
        let (p, q, e, f, m, d) = (
            params.p,
            params.q,
            params.e_ef,
            params.f_ef,
            params.m,
            params.d,
        );
        let name = || format!("({p},{q},{e},{f},{m},{d})");
        let Some(s) = oracle::shape(p, q, e, f, m, d) else {
            t.fail(format!("{}: oracle rejects the shape", name()));
            continue;
        };
        let Some(spec) = t.ok(tame_transfer::rectifier(params), name) else {
            continue;
        };
        t.check(spec.terms.y == s.y, || {
            format!("{}: y = {}, oracle {}", name(), spec.terms.y, s.y)
        });
        t.check(
            (params.n_prime, params.m_prime, params.d_prime, params.big_q)
                == (s.n_prime, s.m_prime, s.d_prime, s.big_q),
            || format!("{}: derived tower differs", name()),
        );
        let mu = oracle::rectifier_exponent(p, &s);
        t.check(spec.mu.exponent() == &mu, || {
            format!("{}: μ = {}, oracle {mu}", name(), spec.mu.exponent())
        });
        t.check(spec.nontrivial == !mu.is_zero(), || {
            format!("{}: nontrivial flag", name())
        });
        let square = (spec.mu.exponent() * 2u32) % spec.mu.modulus();
        t.check(square.is_zero(), || format!("{}: μ² ≠ 1", name()));
        for a in 1..=9 {
            let ok = tame_transfer::blowup_parity_check(params, a).unwrap_or(false);
            let blown = oracle::shape(p, q, e, f, m * a, d).map(|b| b.y);
            let oracle_ok = blown.is_some_and(|yb| yb % 2 == (a * s.y) % 2);
            t.check(ok && oracle_ok, || {
                format!("{}: parity fails at a = {a}", name())
            });
        }
    }
}

fn flip(spec: &mut tame_transfer::RectifierSpec) {
    let level = spec.mu.level().clone();
    spec.nontrivial = !spec.nontrivial;
    spec.mu = if spec.nontrivial {
        CharExp::new(level.clone(), level.order() / 2u32)
    } else {
        CharExp::trivial(level)
    };
}

pub fn descent_replay(cfg: &Config, t: &mut Tally) {
    let shapes = [
        TowerParams::new(3, 3, 2, 1, 1, 4).unwrap(),
        TowerParams::new(3, 3, 1, 1, 1, 2).unwrap(),
    ];
    for params in &shapes {
        let Some(mut closed) = t.ok(tame_transfer::rectifier(params), || "rectifier".into()) else {
            continue;
        };
        if cfg.mutation == Some(Mutation::RectifierSignBug) {
            flip(&mut closed);
        }
        let level = params.top_level().unwrap();
        let m = as_u64(level.order());
        let Some(mu) = oracle_mu(params) else {
            t.fail("oracle rejects the shape".into());
            continue;
        };
        for orbit in oracle_orbits(params.big_q, m) {
            let alpha = CharExp::from_u64(level.clone(), orbit[0]);
            let ctx = || format!("shape (e={}, d={}) α={}", params.e_ef, params.d, orbit[0]);
            let Some(out) = t.ok(
                tame_transfer::transfer_via_descent_against(&alpha, params, &closed),
                ctx,
            ) else {
                continue;
            };
            let want = oracle::orbit((orbit[0] + mu) % m, params.big_q, m);
            t.check(members_u64(out.orbit()) == want, || {
                format!("{}: descent gives {}", ctx(), out.orbit().rep())
            });
        }
    }
}

pub fn pairs(cfg: &Config, t: &mut Tally) {
    let qs: &[(u64, u64)] = match cfg.scale {
        Scale::Small => &[(2, 2), (3, 3), (5, 5)],
        Scale::Full => &[(2, 2), (3, 3), (5, 5), (2, 4), (7, 7)],
    };
    for &(p, q) in qs {
        for n in 1..=4u64 {
            let params = TowerParams::new(p, q, 1, 1, n, 1).unwrap();
            let level = params.top_level().unwrap();
            let m = q.pow(n as u32) - 1;
            let orbits = oracle_orbits(q, m);
            for orbit in &orbits {
                let o = orbit_of(&CharExp::from_u64(level.clone(), orbit[0]));
                let ctx = || format!("Q={q} n'={n} α={}", orbit[0]);
                let Some(pair) = t.ok(tame_transfer::orbit_to_pair(&o, &params), ctx) else {
                    continue;
                };
                let back = tame_transfer::pair_to_orbit(&pair, &params).ok();
                t.check(back.as_ref() == Some(&o), || {
                    format!("{}: pair_to_orbit ∘ orbit_to_pair ≠ id", ctx())
                });
            }
            let mut classes = 0usize;
            for f in (1..=n).filter(|f| n % f == 0) {
                let mf = q.pow(f as u32) - 1;
                for beta in oracle_orbits(q, mf)
                    .into_iter()
                    .filter(|o| o.len() as u64 == f)
                {
                    classes += 1;
                    let ctx = || format!("Q={q} n'={n} f={f} β={}", beta[0]);
                    let Some(pair) = t.ok(
                        tame_transfer::TamePairClass::new(&params, f, big(beta[0])),
                        ctx,
                    ) else {
                        continue;
                    };
                    let back = tame_transfer::pair_to_orbit(&pair, &params)
                        .and_then(|o| tame_transfer::orbit_to_pair(&o, &params));
                    t.check(back.is_ok_and(|b| b.same_class(&pair)), || {
                        format!("{}: orbit_to_pair ∘ pair_to_orbit ≠ id", ctx())
                    });
                }
            }
            t.check(classes == orbits.len(), || {
                format!(
                    "Q={q} n'={n}: {classes} pair classes vs {} orbits",
                    orbits.len()
                )
            });
        }
    }
    let max_m = match cfg.scale {
        Scale::Small => 2_000,
        Scale::Full => 20_000,
    };
    for params in tame_shapes(cfg.scale) {
        let Some(m) = small_top(&params, max_m) else {
            continue;
        };
        let level = params.top_level().unwrap();
        for orbit in oracle_orbits(params.big_q, m) {
            let o = orbit_of(&CharExp::from_u64(level.clone(), orbit[0]));
            let ctx = || {
                format!(
                    "{:?} α={}",
                    (
                        params.p,
                        params.q,
                        params.e_ef,
                        params.f_ef,
                        params.m,
                        params.d
                    ),
                    orbit[0]
                )
            };
            let moved = tame_transfer::orbit_to_pair(&o, &params)
                .and_then(|pair| tame_transfer::transfer_pair(&pair, &params));
            let Some(moved) = t.ok(moved, ctx) else {
                continue;
            };
            let square = (moved.mu_l.exponent() * 2u32) % moved.mu_l.modulus();
            t.check(square.is_zero(), || format!("{}: μ_L² ≠ 1", ctx()));
        }
    }
}

pub fn transfer_invariants(cfg: &Config, t: &mut Tally) {
    let max_m = match cfg.scale {
        Scale::Small => 2_000,
        Scale::Full => 30_000,
    };
    for params in tame_shapes(cfg.scale) {
        let Some(m) = small_top(&params, max_m) else {
            continue;
        };
        let q = params.big_q;
        let name = || {
            format!(
                "{:?}",
                (
                    params.p,
                    params.q,
                    params.e_ef,
                    params.f_ef,
                    params.m,
                    params.d
                )
            )
        };
        let Some(mu) = oracle_mu(&params) else {
            continue;
        };
        let Some(table) = t.ok(tame_transfer::transfer_table(&params, cfg.exec), name) else {
            continue;
        };
        t.check(table.len() == oracle_orbits(q, m).len(), || {
            format!("{}: table size", name())
        });
        let pairs: Vec<(Vec<u64>, Vec<u64>)> = table
            .iter()
            .map(|(s, i)| (members_u64(s), members_u64(i)))
            .collect();
        for (src, img) in &pairs {
            t.check(src.len() == img.len(), || {
                format!("{}: degree of {} changes", name(), src[0])
            });
            t.check(img == &oracle::orbit((src[0] + mu) % m, q, m), || {
                format!("{}: image of {}", name(), src[0])
            });
        }
        for ell in oracle::prime_divisors(m) {
            let reg = |o: &[u64]| oracle::orbit(oracle::regular_part(o[0], ell, m), q, m);
            let mut induced: BTreeMap<Vec<u64>, Vec<u64>> = BTreeMap::new();
            let mut consistent = true;
            for (src, img) in &pairs {
                let (rs, ri) = (reg(src), reg(img));
                consistent &= induced.entry(rs).or_insert_with(|| ri.clone()) == &ri;
            }
            t.check(consistent, || {
                format!("{}: Υ does not descend to {ell}-regular parts", name())
            });
        }
    }
}

fn cis(e: u64, m: u64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * e as f64 / m as f64)
}

pub fn green(cfg: &Config, t: &mut Tally) {
    let f4 = FieldLevel::new(2, 2).unwrap();
    match green_traces::green_trace(&CharExp::from_u64(f4, 1), &big(1), 2) {
        Ok(s) => {
            let z = s.evaluate();
            t.check((z - Complex64::new(1.0, 0.0)).norm() < 1e-12, || {
                format!("−(ζ₃+ζ₃²) evaluates to {z}")
            });
        }
        Err(e) => t.fail(format!("F4 trace: {e}")),
    }
    let f9 = FieldLevel::new(3, 2).unwrap();
    if let Some(s) = t.ok(
        green_traces::green_trace(&CharExp::from_u64(f9, 1), &big(1), 2),
        || "F9 trace".into(),
    ) {
        let z = s.evaluate();
        t.check(
            (z - Complex64::new(0.0, -2f64.sqrt())).norm() < 1e-12,
            || format!("−(ζ₈+ζ₈³) evaluates to {z}"),
        );
    }
    let (d_max, u_max) = match cfg.scale {
        Scale::Small => (4, 3),
        Scale::Full => (5, 4),
    };
    for d in [2u64, 3, 4, 5].into_iter().filter(|&d| d <= d_max) {
        for u in 1..=u_max {
            let level = FieldLevel::new(d, u).unwrap();
            let m = d.pow(u as u32) - 1;
            let regular: Vec<u64> = (0..m)
                .filter(|&x| oracle::orbit(x, d, m).len() as u64 == u)
                .collect();
            for &a in &regular {
                for &g in &regular {
                    let ctx = || format!("|d|={d} u={u} α₀={a} g={g}");
                    let alpha0 = CharExp::from_u64(level.clone(), a);
                    let Some(base) = t.ok(green_traces::green_trace(&alpha0, &big(g), u), ctx)
                    else {
                        continue;
                    };
                    let sign = if u % 2 == 1 { 1.0 } else { -1.0 };
                    let direct: Complex64 = oracle::orbit(a, d, m)
                        .iter()
                        .map(|&c| cis(oracle::mulmod(c, g, m), m))
                        .sum::<Complex64>()
                        * sign;
                    t.check((base.evaluate() - direct).norm() < 1e-12, || {
                        format!("{}: numeric mismatch", ctx())
                    });
                    let conj_ok = oracle::orbit(a, d, m).iter().all(|&c| {
                        green_traces::green_trace(&CharExp::from_u64(level.clone(), c), &big(g), u)
                            .ok()
                            .as_ref()
                            == Some(&base)
                    });
                    t.check(conj_ok, || format!("{}: not Galois invariant", ctx()));
                    let frob =
                        green_traces::green_trace(&alpha0, &big(oracle::mulmod(g, d, m)), u).ok();
                    t.check(frob.as_ref() == Some(&base), || {
                        format!("{}: not conjugacy invariant", ctx())
                    });
                }
            }
        }
    }
}
