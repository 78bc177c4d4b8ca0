//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line.

use std::process::Command;

use qfcalc::calculus::{
    apply_calculus, integrate_calculus, moment_closed_form, monomial_value, p2_moment_undoubled, riesz_projector,
    CalculusKind,
};
use qfcalc::contour::{auto_contour, Circle, Contour};
use qfcalc::identities::{enclosing_contour, integral_sides, split_margin, verify_trial};
use qfcalc::kernels::{kernel, p2_series, KernelKind};
use qfcalc::operators::s_spectrum;
use qfcalc::quat::{ONE, ZERO};
use qfcalc::random::Sampler;
use qfcalc::slicefn::{dconj_power, fd_fueter_oracle, fueter_power, FueterOp, Side, SlicePoly, FD_STEP};
use qfcalc::{CommutingOperator, ImaginaryUnit, Quaternion, QuatMatrix};

/// Outcome of one criterion: pass flag and a one-line summary.
struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rel(a: &QuatMatrix, b: &QuatMatrix) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn rel_q(a: Quaternion, b: Quaternion) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

fn power(n: usize) -> impl Fn(Quaternion) -> Quaternion {
    move |q: Quaternion| q.powi(n as u32)
}

fn conj_power(n: usize) -> impl Fn(Quaternion) -> Quaternion {
    move |q: Quaternion| q.conj().powi(n as u32)
}

fn polynomial_fueter_lemmas() -> Verdict {
    use FueterOp::{Dbar, Delta, D};
    let mut rng = Sampler::new(101);
    let (mut fd, mut exact) = (0.0f64, 0.0f64);
    for n in 1..=10usize {
        let nn = n as u32;
        let dbar = fueter_power(nn, Dbar);
        let d = fueter_power(nn, D);
        let lap = fueter_power(nn, Delta);
        let lap_next = fueter_power(nn + 1, Delta);
        let dconj = if n >= 2 { Some(dconj_power(nn).unwrap()) } else { None };
        for _ in 0..100 {
            let q = rng.quaternion(0.6);
            // Dbar q^n, from either side of the units.
            for side in [Side::Left, Side::Right] {
                fd = fd.max(rel_q(dbar.eval(q), fd_fueter_oracle(power(n), q, Dbar, FD_STEP, side).unwrap()));
            }
            exact = exact.max(rel_q(dbar.eval(q), q.powi(nn - 1) * (2.0 * n as f64) - d.eval(q)));
            // D conj(q)^n.
            if let Some(dc) = &dconj {
                fd = fd.max(rel_q(dc.eval(q), fd_fueter_oracle(conj_power(n), q, D, FD_STEP, Side::Left).unwrap()));
                exact = exact.max(rel_q(dc.eval(q), dbar.swap_conj().eval(q)));
            }
            // D q^n = Dbar conj(q)^n.
            fd = fd.max(rel_q(d.eval(q), fd_fueter_oracle(conj_power(n), q, Dbar, FD_STEP, Side::Left).unwrap()));
            fd = fd.max(rel_q(d.eval(q), fd_fueter_oracle(power(n), q, D, FD_STEP, Side::Left).unwrap()));
            exact = exact.max(rel_q(d.eval(q), d.swap_conj().eval(q)));
            // Delta q^{n+1} = (Delta q^n) q0 - Dbar q^n.
            fd = fd.max(rel_q(lap_next.eval(q), fd_fueter_oracle(power(n + 1), q, Delta, FD_STEP, Side::Left).unwrap()));
            exact = exact.max(rel_q(lap_next.eval(q), lap.eval(q) * q.w - dbar.eval(q)));
            // (Delta q^n) vec(q) + 2 D q^n + Dbar q^n = 0.
            let f5 = lap.eval(q) * q.vector() + d.eval(q) * 2.0 + dbar.eval(q);
            let scale = 1.0 + lap.eval(q).norm() * q.norm() + d.eval(q).norm() + dbar.eval(q).norm();
            exact = exact.max(f5.norm() / scale);
        }
    }
    verdict(fd <= 1e-5 && exact <= 1e-12, format!("fd oracle {fd:.2e} (<= 1e-5), exact {exact:.2e} (<= 1e-12)"))
}

fn kernel_series() -> Verdict {
    let mut rng = Sampler::new(202);
    let mut final_err: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for trial in 0..12 {
        let n = 1 + trial % 4;
        let t = rng.commuting_operator(n, trial % 2 == 0);
        let rho = rng.uniform(0.4, 0.5);
        let dir = rng.quaternion(1.0);
        let s = dir * (t.norm() / rho / dir.norm());
        for (side, kind) in [(Side::Left, KernelKind::P2Left), (Side::Right, KernelKind::P2Right)] {
            let exact = kernel(kind, &t, s).unwrap();
            let err = |terms: usize| rel(&p2_series(&t, s, terms, side).unwrap(), &exact);
            let (e10, e30) = (err(10), err(30));
            let observed = (e30 / e10).powf(1.0 / 20.0);
            worst_ratio = worst_ratio.max(observed / rho);
            final_err = final_err.max(err(60));
        }
    }
    verdict(
        final_err <= 1e-10 && worst_ratio <= 1.25,
        format!("residual at N=60 {final_err:.2e} (<= 1e-10), observed rate / (|T|/|s|) at most {worst_ratio:.3}"),
    )
}

fn pointwise_identities() -> Verdict {
    let names = [
        "qf_left", "qf_right", "l1_left", "l1_right", "fr2_left", "fr2_right", "genreseq_left", "genreseq_right", "sresc",
        "bres", "preseq", "ress1", "qres", "wrong",
    ];
    let mut worst = (0.0f64, "");
    let mut failures = Vec::new();
    for name in names {
        for k in 0..50 {
            let r = verify_trial(name, 303, k, 1e-10, None).unwrap();
            if r.relative() > worst.0 {
                worst = (r.relative(), name);
            }
            if !r.pass {
                failures.push(format!("{name}#{k}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!("14 identities x 50 inputs, worst relative residual {:.2e} ({}), failures {failures:?}", worst.0, worst.1),
    )
}

fn moments() -> Verdict {
    let mut rng = Sampler::new(404);
    let mut worst: f64 = 0.0;
    let mut f_zero: f64 = 0.0;
    for n in 1..=4 {
        let t = rng.commuting_operator(n, n % 2 == 1);
        let c = enclosing_contour(&s_spectrum(&t).unwrap(), 1.0, rng.imaginary_unit(), 512).unwrap();
        for kind in CalculusKind::ALL {
            for m in 0..=8 {
                for side in [Side::Left, Side::Right] {
                    let v = apply_calculus(kind, &SlicePoly::monomial(side, m, ONE), &t, &c).unwrap();
                    worst = worst.max(rel(&v, &monomial_value(kind, &t, m)));
                    if kind == CalculusKind::F && m <= 1 {
                        f_zero = f_zero.max(v.norm());
                    }
                }
            }
        }
    }
    verdict(
        worst <= 1e-8 && f_zero <= 1e-10,
        format!("worst relative error {worst:.2e} (<= 1e-8), F on 1 and q {f_zero:.2e} (<= 1e-10)"),
    )
}

fn factor_two() -> Verdict {
    let mut rng = Sampler::new(505);
    let (mut doubled, mut halved_gap) = (0.0f64, f64::INFINITY);
    for n in 1..=3 {
        let t = rng.commuting_operator(n, true);
        let c = enclosing_contour(&s_spectrum(&t).unwrap(), 1.0, rng.imaginary_unit(), 512).unwrap();
        for m in 0..=6 {
            let quad = apply_calculus(CalculusKind::P2, &SlicePoly::monomial(Side::Left, m + 1, ONE), &t, &c).unwrap();
            let displayed = p2_moment_undoubled(&t, m);
            doubled = doubled.max(rel(&quad, &moment_closed_form(CalculusKind::P2, &t, m)));
            doubled = doubled.max(rel(&quad, &displayed.scale(2.0)));
            halved_gap = halved_gap.min(rel(&quad, &displayed));
        }
    }
    verdict(
        doubled <= 1e-8 && halved_gap > 0.1,
        format!(
            "quadrature vs 2[(m+1)T^m + sum] {doubled:.2e} (<= 1e-8); vs the undoubled display at least {halved_gap:.2e} apart"
        ),
    )
}

fn product_rules() -> Verdict {
    let mut rng = Sampler::new(606);
    let names = ["prl", "prr", "laplca1", "pr0", "pr4", "product1"];
    let mut worst = (0.0f64, "");
    let mut cross: f64 = 0.0;
    for trial in 0..9 {
        let n = 1 + trial % 3;
        let t = rng.real_spectrum_operator(n);
        let (df, dg) = (rng.index(5), rng.index(5));
        let f = rng.intrinsic_poly(df);
        let g = rng.poly(Side::Left, dg);
        let sp = s_spectrum(&t).unwrap();
        let inner = enclosing_contour(&sp, 1.0, rng.imaginary_unit(), 256).unwrap();
        let outer = enclosing_contour(&sp, 1.4, rng.imaginary_unit(), 256).unwrap();
        for name in names {
            for (l, r) in integral_sides(name, &t, &f, &g, &inner, &outer).unwrap() {
                let e = rel(&l, &r);
                if e > worst.0 {
                    worst = (e, name);
                }
            }
        }
        let lap = integral_sides("laplca1", &t, &f, &g, &inner, &outer).unwrap();
        let pr0 = integral_sides("pr0", &t, &f, &g, &inner, &outer).unwrap();
        cross = cross.max(rel(&lap[0].1, &pr0[0].1));
    }
    verdict(
        worst.0 <= 1e-8 && cross <= 1e-8,
        format!("worst relative residual {:.2e} ({}), laplca1 vs Pr0 right-hand sides {cross:.2e}", worst.0, worst.1),
    )
}

fn riesz_projectors() -> Verdict {
    let mut rng = Sampler::new(707);
    let (mut idem, mut comm, mut partition, mut full) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for trial in 0..6 {
        let (t, sel) = rng.split_operator(2 + trial % 3);
        let sp = s_spectrum(&t).unwrap();
        let rest: Vec<usize> = (0..sp.len()).filter(|i| !sel.contains(i)).collect();
        let j = rng.imaginary_unit();
        let c_sel = auto_contour(&sp, &sel, split_margin(&sp, &sel), j, 256).unwrap();
        let c_rest = auto_contour(&sp, &rest, split_margin(&sp, &rest), j, 256).unwrap();
        let c_all = enclosing_contour(&sp, 1.0, j, 256).unwrap();
        let id = QuatMatrix::identity(t.dim());
        let tm = t.matrix();
        for kind in CalculusKind::ALL {
            let p = riesz_projector(kind, &t, &c_sel).unwrap();
            idem = idem.max((&(&p * &p) - &p).norm());
            if kind == CalculusKind::P2 {
                comm = comm.max((&(&tm * &p) - &(&p * &tm)).norm());
            }
            full = full.max((&riesz_projector(kind, &t, &c_all).unwrap() - &id).norm());
        }
        let sum = &riesz_projector(CalculusKind::S, &t, &c_sel).unwrap() + &riesz_projector(CalculusKind::S, &t, &c_rest).unwrap();
        partition = partition.max((&sum - &id).norm());
    }
    verdict(
        idem <= 1e-8 && comm <= 1e-8 && partition <= 1e-8 && full <= 1e-8,
        format!("|P^2-P| {idem:.2e}, |TP-PT| {comm:.2e}, S partition {partition:.2e}, full spectrum {full:.2e}"),
    )
}

fn invariances() -> Verdict {
    let mut rng = Sampler::new(808);
    let (mut shift, mut units, mut deform, mut sides, mut vanish) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in 1..=3 {
        let t = rng.commuting_operator(n, n != 2);
        let sp = s_spectrum(&t).unwrap();
        let c = enclosing_contour(&sp, 1.0, ImaginaryUnit::e1(), 512).unwrap();
        let deg = 1 + rng.index(4);
        let f = rng.poly(Side::Left, deg);
        let mut shifted = f.clone();
        shifted.coeffs[0] += rng.quaternion(1.0);
        for kind in [CalculusKind::P2, CalculusKind::Q] {
            shift = shift.max(rel(&apply_calculus(kind, &f, &t, &c).unwrap(), &apply_calculus(kind, &shifted, &t, &c).unwrap()));
        }
        for kind in CalculusKind::ALL {
            let base = apply_calculus(kind, &f, &t, &c).unwrap();
            for _ in 0..5 {
                let other = c.with_unit(rng.imaginary_unit());
                units = units.max(rel(&base, &apply_calculus(kind, &f, &t, &other).unwrap()));
            }
            for factor in [1.5, 2.0] {
                deform = deform.max(rel(&base, &apply_calculus(kind, &f, &t, &c.scaled(factor)).unwrap()));
            }
        }
    }
    for k in 0..6 {
        for name in ["intri", "inte4"] {
            sides = sides.max(verify_trial(name, 809, k, 1e-10, None).unwrap().relative());
        }
        for name in ["mono", "harmo"] {
            vanish = vanish.max(verify_trial(name, 810, k, 1e-10, None).unwrap().relative());
        }
    }
    // A circle that encloses none of the spectrum.
    let (t, _) = rng.split_operator(3);
    let far = Contour::new(ImaginaryUnit::e1(), vec![Circle::real(10.0, 1.0)], 256).unwrap();
    for (kind, side) in [(CalculusKind::P2, Side::Left), (CalculusKind::P2, Side::Right), (CalculusKind::Q, Side::Left)] {
        vanish = vanish.max(integrate_calculus(kind, &SlicePoly::constant(side, ONE), &t, &far).unwrap().norm());
    }
    let worst = shift.max(units).max(deform).max(sides).max(vanish);
    verdict(
        worst <= 1e-10,
        format!("shift {shift:.2e}, J {units:.2e}, deformation {deform:.2e}, left/right {sides:.2e}, vanishing {vanish:.2e}"),
    )
}

fn cli_determinism() -> Verdict {
    let run = || Command::new(env!("CARGO_BIN_EXE_qfcalc")).args(["selftest", "--seed", "0"]).output().unwrap();
    let (a, b) = (run(), run());
    let ok = a.status.code() == Some(0) && b.status.code() == Some(0) && a.stdout == b.stdout && !a.stdout.is_empty();
    verdict(ok, format!("exit codes {:?}/{:?}, {} bytes, identical {}", a.status.code(), b.status.code(), a.stdout.len(), a.stdout == b.stdout))
}

type Criterion = (&'static str, fn() -> Verdict);

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("polynomial Fueter lemmas", polynomial_fueter_lemmas),
        ("kernel series", kernel_series),
        ("pointwise operator identities", pointwise_identities),
        ("moment reproduction", moments),
        ("factor-2 adjudication", factor_two),
        ("product rules", product_rules),
        ("Riesz projectors", riesz_projectors),
        ("well-posedness and invariances", invariances),
        ("CLI determinism", cli_determinism),
    ];
    let mut all = true;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let v = check();
        all &= v.pass;
        println!("{} criterion {} ({title}): {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    assert!(all, "some acceptance criteria failed");
}

#[test]
fn zero_is_a_fixed_point_of_every_calculus() {
    let t = CommutingOperator::zero(2);
    let c = enclosing_contour(&s_spectrum(&t).unwrap(), 1.0, ImaginaryUnit::e1(), 64).unwrap();
    for kind in CalculusKind::ALL {
        let v = apply_calculus(kind, &SlicePoly::constant(Side::Left, ZERO), &t, &c).unwrap();
        assert_eq!(v, QuatMatrix::zeros(2));
    }
}
