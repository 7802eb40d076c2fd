use hqp::material::{loss_scaled, permittivity_at, MaterialModel, UniaxialPermittivity};
use hqp::resonance::{
    attainable_ratio, gamma_self_at, hsr_frequency, pair_response_at, pair_response_with, upper_band, GammaMethod, PairSpec, ResonatorGeometry,
    SeriesControl, SeriesForm,
};
use proptest::prelude::*;

fn enriched(ls: f64) -> MaterialModel {
    loss_scaled(&MaterialModel::hbn(), ls).unwrap()
}

fn in_band(w: f64, ls: f64) -> UniaxialPermittivity {
    permittivity_at(&enriched(ls), w).unwrap()
}

fn arb_case() -> impl Strategy<Value = (UniaxialPermittivity, ResonatorGeometry)> {
    (1400.0..1600.0f64, 0.2..1.0f64, 20.0..200.0f64, 0.2..4.0f64, 1.0..20.0f64).prop_map(|(w, ls, r, aspect, h)| {
        (in_band(w, ls), ResonatorGeometry::new(r, aspect * r, h))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resonance_condition_met(r in 5.0..500.0f64, m in 1u32..4, f in 0.0..1.0f64, ls in 0.1..1.0f64) {
        let model = enriched(ls);
        let band = upper_band(&model).unwrap();
        let (lo, hi) = attainable_ratio(&model, &band);
        let target = lo + f * (hi - lo);
        let d = 4.0 * r * m as f64 / target;
        let w = hsr_frequency(&model, r, d, m, &band).unwrap();
        let s = permittivity_at(&model, w).unwrap().slope().re;
        prop_assert!(((s - target) / target).abs() < 1e-9);
    }

    #[test]
    fn exchange_is_reciprocal_and_bilinear((eps, geom) in arb_case(), p1 in 0.1..3.0f64, p2 in 0.1..3.0f64) {
        let ctl = SeriesControl::Fixed(4096);
        let a = pair_response_at(&eps, &geom, &PairSpec::opposite(p1, p2), ctl).unwrap();
        let b = pair_response_at(&eps, &geom, &PairSpec::opposite(p2, p1), ctl).unwrap();
        prop_assert!((a.value() - b.value()).norm() <= 1e-14 * a.value().norm());
        let unit = pair_response_at(&eps, &geom, &PairSpec::opposite(1.0, 1.0), ctl).unwrap();
        prop_assert!((a.value() - unit.value() * (p1 * p2)).norm() <= 1e-12 * a.value().norm());
    }

    #[test]
    fn self_decay_is_passive((eps, geom) in arb_case()) {
        let s = pair_response_at(&eps, &geom, &PairSpec::self_response(1.0), SeriesControl::default()).unwrap();
        prop_assert!(s.gamma > 0.0);
        for method in [GammaMethod::ClosedForm, GammaMethod::Quadrature] {
            prop_assert!(gamma_self_at(&eps, &geom, 1.0, method).unwrap().gamma >= 0.0);
        }
    }

    /// Decay matrix [[Γ₁₁, Γ₁₂], [Γ₁₂, Γ₂₂]] of two identical emitters on
    /// opposite faces is positive semidefinite.
    #[test]
    fn pair_decay_matrix_is_psd((eps, geom) in arb_case()) {
        let ctl = SeriesControl::default();
        let g11 = pair_response_at(&eps, &geom, &PairSpec::self_response(1.0), ctl).unwrap().gamma;
        let g12 = pair_response_at(&eps, &geom, &PairSpec::opposite(1.0, 1.0), ctl).unwrap().gamma;
        prop_assert!(g11 * g11 - g12 * g12 >= -1e-9 * g11 * g11, "g11 {g11} g12 {g12}");
    }

    #[test]
    fn decay_falls_with_spacer((eps, geom) in arb_case(), grow in 1.05..3.0f64) {
        let far = ResonatorGeometry { spacer: geom.spacer * grow, ..geom };
        for method in [GammaMethod::ClosedForm, GammaMethod::Quadrature] {
            let (a, b) = (gamma_self_at(&eps, &geom, 1.0, method).unwrap(), gamma_self_at(&eps, &far, 1.0, method).unwrap());
            prop_assert!(b.gamma < a.gamma);
        }
    }

    /// The reported truncation estimate bounds the change from summing 16×
    /// as many terms.
    #[test]
    fn truncation_estimate_bounds_tail((eps, geom) in arb_case(), n in prop::sample::select(vec![256usize, 512, 1024]), self_resp in any::<bool>()) {
        let spec = if self_resp { PairSpec::self_response(1.0) } else { PairSpec::opposite(1.0, 1.0) };
        let short = pair_response_at(&eps, &geom, &spec, SeriesControl::Fixed(n)).unwrap();
        let long = pair_response_at(&eps, &geom, &spec, SeriesControl::Fixed(16 * n)).unwrap();
        let diff = (short.value() - long.value()).norm();
        prop_assert!(diff <= short.truncation_estimate + 1e-12 * long.value().norm(), "diff {diff:e} > est {:e}", short.truncation_estimate);
    }

    #[test]
    fn resummation_is_exact((eps, geom) in arb_case(), self_resp in any::<bool>()) {
        let spec = if self_resp { PairSpec::self_response(1.0) } else { PairSpec::opposite(1.0, 1.0) };
        let ctl = SeriesControl::Fixed(2048);
        let a = pair_response_with(&eps, &geom, &spec, ctl, SeriesForm::Direct).unwrap();
        let b = pair_response_with(&eps, &geom, &spec, ctl, SeriesForm::Resummed).unwrap();
        prop_assert!((a.value() - b.value()).norm() <= 1e-9 * b.value().norm());
    }
}

#[test]
fn quadrature_self_converges() {
    let eps = in_band(1500.0, 1.0 / 3.0);
    let geom = ResonatorGeometry::new(100.0, 80.0, 4.0);
    let g = gamma_self_at(&eps, &geom, 1.0, GammaMethod::Quadrature).unwrap();
    let err = g.error.unwrap();
    assert!(err <= 1e-8 * g.gamma, "{err:e}");
}
