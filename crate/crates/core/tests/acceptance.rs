//! Release gate: one test per numbered shipping criterion, each printing a
//! single pass/fail line with its headline numbers. Run with `--nocapture`
//! to see the lines on success; a failing check lists every miss.

use std::time::Instant;

use dyncoh_core::{
    conversion_distance, distill_closed_form, dmax_channels, exact_one_shot_cost,
    free_subspace_basis, log_robustness, monotone_g, one_shot_distill, plus_state_preparation,
    random_channel, random_superchannel, random_unitary, seeded, uniform_state, CMatrix,
    ChannelChoi, FreeSet, MonotoneProbe, ProductDims, SystemDim,
};

struct Gate {
    id: usize,
    start: Instant,
    failures: Vec<String>,
}

impl Gate {
    fn new(id: usize) -> Self {
        Gate {
            id,
            start: Instant::now(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }

    /// Print the one-line verdict, then fail the test if anything missed.
    fn finish(mut self, budget_secs: Option<f64>, detail: &str) {
        let secs = self.start.elapsed().as_secs_f64();
        if let Some(b) = budget_secs {
            if secs >= b {
                self.failures
                    .push(format!("runtime {secs:.1} s exceeded the {b:.0} s budget"));
            }
        }
        let verdict = if self.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!("acceptance {} {verdict}: {detail} ({secs:.1} s)", self.id);
        assert!(
            self.failures.is_empty(),
            "acceptance {}: {}",
            self.id,
            self.failures.join("; ")
        );
    }
}

#[test]
fn acceptance_1_log_robustness_anchors() {
    let mut g = Gate::new(1);
    let mut rng = seeded(101);
    let classical = [
        ("dephasing(2)", ChannelChoi::dephasing(2).unwrap()),
        ("dephasing(3)", ChannelChoi::dephasing(3).unwrap()),
        (
            "classical part of a random qubit channel",
            random_channel(2, 2, &mut rng).classical_part(),
        ),
        (
            "classical part of a random qutrit channel",
            random_channel(3, 3, &mut rng).classical_part(),
        ),
        (
            "uniform replacement",
            ChannelChoi::replacement(&uniform_state(2), 2).unwrap(),
        ),
    ];
    for (name, c) in &classical {
        let v = log_robustness(c).expect("log robustness").value;
        g.check(v.abs() <= 1e-5, || format!("{name}: expected 0, got {v:.2e}"));
    }
    for (name, c, want) in [
        ("identity(2)", ChannelChoi::identity(2).unwrap(), 1.0),
        ("replace-plus(2)", ChannelChoi::replace_plus(2).unwrap(), 1.0),
    ] {
        let v = log_robustness(&c).expect("log robustness").value;
        g.check(
            (v - want).abs() <= 1e-5,
            || format!("{name}: expected {want}, got {v:.6}"),
        );
    }
    g.finish(
        Some(5.0),
        "log-robustness is 0 on five classical channels and 1 on the two qubit units",
    );
}

#[test]
fn acceptance_2_monotone_anchors() {
    let mut g = Gate::new(2);
    let mut rng = seeded(202);
    for i in 0..10 {
        let set = if i % 2 == 0 {
            FreeSet::Misc
        } else {
            FreeSet::Disc
        };
        let probe = MonotoneProbe {
            p: random_channel(2, 2, &mut rng),
            set,
        };
        let n = random_channel(2, 2, &mut rng).classical_part();
        let v = monotone_g(&probe, &n).expect("monotone");
        g.check(v.abs() <= 1e-4, || {
            format!("probe {i} ({set:?}): expected 0 on a classical channel, got {v:.2e}")
        });
    }
    let id_probe = MonotoneProbe {
        p: ChannelChoi::identity(2).unwrap(),
        set: FreeSet::Misc,
    };
    for i in 0..5 {
        let n = ChannelChoi::unitary(&random_unitary(2, &mut rng)).unwrap();
        let v = monotone_g(&id_probe, &n).expect("monotone");
        g.check(
            (v - 2.0).abs() <= 1e-4,
            || format!("random unitary {i}: expected 2, got {v:.6}"),
        );
    }
    let v = monotone_g(&id_probe, &ChannelChoi::replace_plus(2).unwrap()).expect("monotone");
    g.check(
        (v - 2.0).abs() <= 1e-4,
        || format!("replace-plus(2): expected 2, got {v:.6}"),
    );
    g.finish(
        Some(120.0),
        "the identity-probe monotone hits 2 on qubit unitaries and every probe vanishes on classical channels",
    );
}

#[test]
fn acceptance_3_distillation_grid() {
    let mut g = Gate::new(3);
    let mut cases = 0usize;
    for d in [2usize, 3] {
        for lambda in [0.0, 0.3, 0.7, 1.0] {
            for eps in [0.05, 0.2, 0.5] {
                for family in ["depolarizing", "partial-dephasing"] {
                    let c = match family {
                        "depolarizing" => ChannelChoi::depolarizing(lambda, d).unwrap(),
                        _ => ChannelChoi::partial_dephasing(lambda, d).unwrap(),
                    };
                    let want = distill_closed_form(lambda, d, eps);
                    for set in [FreeSet::Misc, FreeSet::Disc] {
                        let got = one_shot_distill(&c, eps, set).expect("distill").n;
                        cases += 1;
                        g.check(got == want, || {
                            format!(
                                "{family} d={d} lambda={lambda} eps={eps} {set:?}: expected n={want}, got n={got}"
                            )
                        });
                    }
                }
            }
        }
    }
    g.check(cases == 96, || format!("expected 96 grid cells, ran {cases}"));
    g.finish(
        Some(300.0),
        "the one-shot distillation search reproduces the closed-form size on all 96 grid cells",
    );
}

#[test]
fn acceptance_4_additivity() {
    let mut g = Gate::new(4);
    let mut rng = seeded(404);
    for i in 0..10 {
        let n = random_channel(2, 2, &mut rng);
        let m = random_channel(2, 2, &mut rng);
        let e = random_channel(2, 2, &mut rng);
        let f = random_channel(2, 2, &mut rng);
        let lr_n = log_robustness(&n).expect("lr").value;
        let lr_m = log_robustness(&m).expect("lr").value;
        let big = ChannelChoi::tensor(&n, &m).unwrap();
        let lr_big = log_robustness(&big).expect("lr").value;
        g.check((lr_big - lr_n - lr_m).abs() <= 1e-5, || {
            format!(
                "tuple {i}: log-robustness {lr_big:.8} vs parts {:.8}",
                lr_n + lr_m
            )
        });
        let d_ne = dmax_channels(&n, &e).expect("dmax").value;
        let d_mf = dmax_channels(&m, &f).expect("dmax").value;
        let ref_big = ChannelChoi::tensor(&e, &f).unwrap();
        let d_big = dmax_channels(&big, &ref_big).expect("dmax").value;
        g.check((d_big - d_ne - d_mf).abs() <= 1e-6, || {
            format!(
                "tuple {i}: max-relative entropy {d_big:.9} vs parts {:.9}",
                d_ne + d_mf
            )
        });
    }
    g.finish(
        Some(180.0),
        "log-robustness and the channel max-relative entropy are additive on ten random qubit tensor tuples",
    );
}

#[test]
fn acceptance_5_duality_gaps() {
    let mut g = Gate::new(5);
    let mut rng = seeded(505);
    for i in 0..25 {
        let n = random_channel(2, 2, &mut rng);
        let r = log_robustness(&n).expect("lr");
        g.check(
            r.gap <= 1e-6,
            || format!("log-robustness instance {i}: relative gap {:.2e}", r.gap),
        );
    }
    for i in 0..25 {
        let n = random_channel(2, 2, &mut rng);
        let m = random_channel(2, 2, &mut rng);
        let set = if i % 2 == 0 {
            FreeSet::Misc
        } else {
            FreeSet::Disc
        };
        let r = conversion_distance(&n, &m, set).expect("conversion");
        g.check(r.gap() <= 1e-6, || {
            format!("conversion instance {i} ({set:?}): relative gap {:.2e}", r.gap())
        });
    }
    g.finish(
        None,
        "independent primal and dual solves agree to 1e-6 on 25 random instances of each program",
    );
}

#[test]
fn acceptance_6_superchannel_structure() {
    let mut g = Gate::new(6);
    let mut rng = seeded(606);
    let shapes = [
        ((2, 2), (2, 2)),
        ((1, 2), (2, 2)),
        ((2, 2), (1, 2)),
        ((2, 3), (2, 2)),
        ((3, 2), (2, 2)),
    ];
    for i in 0..20 {
        let ((a0, a1), (b0, b1)) = shapes[i % shapes.len()];
        let sa = SystemDim::new(a0, a1).unwrap();
        let sb = SystemDim::new(b0, b1).unwrap();
        let th = random_superchannel(sa, sb, &mut rng);
        let four = ProductDims::new(&[a0, a1, b0, b1]).unwrap();
        let j = th.choi();

        let marg = j.partial_trace(&four, &[1, 2]).unwrap();
        let dev = marg.sub(&CMatrix::identity(a1 * b0)).frobenius();
        g.check(
            dev <= 1e-10,
            || format!("superchannel {i}: output marginal misses the identity by {dev:.2e}"),
        );

        let x = j.partial_trace(&four, &[0, 1, 2]).unwrap();
        let y = j.partial_trace(&four, &[0, 2]).unwrap();
        let three = ProductDims::new(&[a0, b0, a1]).unwrap();
        let rebuilt = y
            .tensor(&CMatrix::identity(a1).scale(1.0 / a1 as f64))
            .permute_factors(&three, &[0, 2, 1])
            .unwrap();
        let dev = x.sub(&rebuilt).frobenius();
        g.check(
            dev <= 1e-10,
            || format!("superchannel {i}: input marginal fails to factorize by {dev:.2e}"),
        );

        let m = random_channel(a0, a1, &mut rng);
        let deph_in = ChannelChoi::dephasing(a0).unwrap();
        let deph_out = ChannelChoi::dephasing(a1).unwrap();
        let sandwiched =
            ChannelChoi::compose(&deph_out, &ChannelChoi::compose(&m, &deph_in).unwrap()).unwrap();
        let dev = th
            .pre_dephased()
            .apply(&m)
            .unwrap()
            .choi()
            .sub(th.apply(&sandwiched).unwrap().choi())
            .frobenius();
        g.check(dev <= 1e-10, || {
            format!("superchannel {i}: pre-dephasing disagrees with dephasing the argument by {dev:.2e}")
        });
        let dev = th
            .post_dephased()
            .apply(&m)
            .unwrap()
            .choi()
            .sub(th.apply(&m).unwrap().classical_part().choi())
            .frobenius();
        g.check(dev <= 1e-10, || {
            format!("superchannel {i}: post-dephasing disagrees with dephasing the output by {dev:.2e}")
        });
    }

    let mut naive_disagreed = false;
    for (a0, a1) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        for (b0, b1) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let sa = SystemDim::new(a0, a1).unwrap();
            let sb = SystemDim::new(b0, b1).unwrap();
            let (na, nb) = (a0 * a1, b0 * b1);
            let nab = na * nb;
            let misc = free_subspace_basis(FreeSet::Misc, sa, sb).elements.len();
            g.check(misc == nab * (nb - 1), || {
                format!("({a0},{a1})->({b0},{b1}): {misc} basis elements, expected |AB|(|B|-1) = {}", nab * (nb - 1))
            });
            let disc = free_subspace_basis(FreeSet::Disc, sa, sb).elements.len();
            g.check(disc == nab * (na + nb - 2), || {
                format!("({a0},{a1})->({b0},{b1}): {disc} basis elements, expected |AB|(|A|+|B|-2) = {}", nab * (na + nb - 2))
            });
            if disc != nab * (na + nb - 1) {
                naive_disagreed = true;
            }
        }
    }
    g.check(naive_disagreed, || {
        "the naive count |AB|(|A|+|B|-1) never disagreed with the measured dimension".into()
    });
    g.finish(
        None,
        "marginals and dephasing relations hold to 1e-10 on 20 random superchannels; tangent \
         counts match |AB|(|B|-1) and |AB|(|A|+|B|-2); flagged: the naive |AB|(|A|+|B|-1) \
         overcounts the dephasing-covariant tangent space by |AB|",
    );
}

#[test]
fn acceptance_7_cost_sandwich_and_realizer() {
    let mut g = Gate::new(7);
    let mut rng = seeded(707);
    let channels = [
        ("identity(2)", ChannelChoi::identity(2).unwrap()),
        ("identity(3)", ChannelChoi::identity(3).unwrap()),
        (
            "depolarizing(0.5, 2)",
            ChannelChoi::depolarizing(0.5, 2).unwrap(),
        ),
        ("random qubit channel", random_channel(2, 2, &mut rng)),
    ];
    for (name, c) in &channels {
        for set in [FreeSet::Misc, FreeSet::Disc] {
            let r = exact_one_shot_cost(c, set).expect("cost");
            g.check(
                r.lr - 1e-7 <= r.cost_bits && r.cost_bits <= r.lr + 1.0 + 1e-7,
                || {
                    format!(
                        "{name} {set:?}: cost {:.6} outside [{:.6}, {:.6}]",
                        r.cost_bits,
                        r.lr,
                        r.lr + 1.0
                    )
                },
            );
            let prep = plus_state_preparation(r.m).expect("prep");
            let back = r.omega.apply(&prep).expect("apply");
            let dev = back.choi().sub(c.choi()).frobenius();
            g.check(
                dev <= 1e-8,
                || format!("{name} {set:?}: realizer misses the channel by {dev:.2e}"),
            );
            g.check(r.omega.classify(1e-6).is_in(set), || {
                format!("{name} {set:?}: realizer fails the membership test")
            });
        }
    }
    g.finish(
        None,
        "exact one-shot cost stays inside its one-bit sandwich and the realizing superchannel reconstructs each channel",
    );
}

#[test]
fn acceptance_8_conversion_sanity() {
    let mut g = Gate::new(8);
    let mut rng = seeded(808);
    for i in 0..5 {
        let n = random_channel(2, 2, &mut rng);
        for set in [FreeSet::Misc, FreeSet::Disc] {
            let v = conversion_distance(&n, &n, set).expect("conversion").value;
            g.check(
                v.abs() <= 1e-7,
                || format!("instance {i} {set:?}: converting a channel to itself costs {v:.2e}"),
            );
            let cl = n.classical_part();
            let v = conversion_distance(&n, &cl, set).expect("conversion").value;
            g.check(v.abs() <= 1e-7, || {
                format!("instance {i} {set:?}: converting to the classical part costs {v:.2e}")
            });
        }
    }
    let r = conversion_distance(
        &ChannelChoi::dephasing(2).unwrap(),
        &ChannelChoi::identity(2).unwrap(),
        FreeSet::Misc,
    )
    .expect("conversion");
    g.check(
        r.value > 0.1,
        || format!("dephasing to identity came out cheap: {:.6}", r.value),
    );
    g.check(
        r.dual_value > 0.1,
        || format!("no certified lower bound: dual value {:.6}", r.dual_value),
    );
    g.check(
        r.gap() <= 1e-6,
        || format!("dephasing to identity gap {:.2e}", r.gap()),
    );
    g.finish(
        None,
        "free conversions to self and to classical targets cost nothing; dephasing to identity is certifiably expensive",
    );
}

#[test]
fn acceptance_9_regularized_rate_statement() {
    let mut g = Gate::new(9);
    // At a unit the sandwich closes exactly, which with additivity pins the
    // many-copy rate to the same number without a large-n computation.
    let r = exact_one_shot_cost(&ChannelChoi::identity(2).unwrap(), FreeSet::Misc).expect("cost");
    g.check((r.cost_bits - r.lr).abs() <= 1e-6, || {
        format!(
            "identity(2): cost {:.6} vs log-robustness {:.6}",
            r.cost_bits, r.lr
        )
    });
    g.finish(
        None,
        "asymptotic rates are beyond desk scale; additivity (4), duality (5) and the cost sandwich (7) witness them at the finite level",
    );
}
