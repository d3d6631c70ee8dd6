use cflab_core::diagnostics::quotient_logs;
use cflab_core::{
    checkpoint, convergents, expand_certified, expand_decimal, from_cf, reciprocal_sum, to_decimal,
    CfExpansion, ExpansionMode, ExpansionStream, LogDenominators, MersenneCatalog,
    ReferenceConstants, SequenceKind, SequenceSpec, StatAccumulator, Tail,
};

fn mersenne_sum(n: usize) -> cflab_core::BigRational {
    reciprocal_sum(&SequenceSpec::new(SequenceKind::Mersenne, n), &MersenneCatalog::embedded()).unwrap()
}

#[test]
fn certified_quotients_hold_for_the_exact_sum() {
    let r = mersenne_sum(16);
    let exact = cflab_core::expand_rational(&r);
    let d = to_decimal(&r, 500);
    let cert = expand_decimal(&d, ExpansionMode::Certified).unwrap();
    assert!(cert.len() > 400);
    assert_eq!(cert.quotients(), &exact.quotients()[..cert.len()]);
    assert_eq!(cert.tail(), Tail::Truncated { precision: 500 });
}

#[test]
fn reconstruction_stays_inside_the_enclosure() {
    let d = to_decimal(&mersenne_sum(12), 120);
    let (lo, hi) = d.enclosure();
    let cf = expand_certified(&lo, &hi).unwrap();
    // Every convergent of the certified prefix is a convergent of every
    // point in [lo, hi]; the last one is within 1/Q^2 of both ends.
    let value = from_cf(&cf);
    let last = convergents(&cf).last().unwrap();
    let q2 = cflab_core::BigRational::new(1.into(), &last.q * &last.q);
    assert!((&value - &lo).abs() <= q2);
    assert!((&hi - &value).abs() <= q2);
}

#[test]
fn text_json_and_stream_agree() {
    let d = to_decimal(&mersenne_sum(14), 800);
    let cf = expand_decimal(&d, ExpansionMode::Paper).unwrap();
    let back = CfExpansion::from_text(&cf.to_text()).unwrap();
    assert_eq!(back, cf);
    let json = serde_json::to_string(&cf).unwrap();
    assert_eq!(serde_json::from_str::<CfExpansion>(&json).unwrap(), cf);
    let streamed: Vec<_> = ExpansionStream::from_decimal(&d, ExpansionMode::Paper).unwrap().collect();
    assert_eq!(streamed, cf.quotients());
}

#[test]
fn log_domain_tracks_exact_denominators() {
    let terms = SequenceSpec::new(SequenceKind::Mersenne, 20)
        .terms(&MersenneCatalog::embedded())
        .unwrap();
    let cf = CfExpansion::new(0.into(), terms.clone(), Tail::Truncated { precision: 0 }).unwrap();
    let exact = LogDenominators::from_convergents(&convergents(&cf).collect::<Vec<_>>());
    let exps: Vec<u64> = MersenneCatalog::embedded().exponents().take(20).collect();
    let from_exponents = LogDenominators::from_mersenne_exponents(&exps);
    let from_logs = LogDenominators::from_quotient_logs(&quotient_logs(&terms));
    for n in 1..=20 {
        let tol = exact.abs_error(n) + from_exponents.abs_error(n);
        assert!((exact.ln_q(n) - from_exponents.ln_q(n)).abs() <= tol, "n = {n}");
        assert!((exact.ln_q(n) - from_logs.ln_q(n)).abs() <= tol, "n = {n}");
    }
}

#[test]
fn accumulator_checkpoint_resume_is_identical() {
    let d = to_decimal(&mersenne_sum(18), 3000);
    let cf = expand_decimal(&d, ExpansionMode::Certified).unwrap();
    let refs = ReferenceConstants::compute();
    let mut one = StatAccumulator::new(cf.a0(), 37, 20, &refs).unwrap();
    let mut two = one.clone();
    let cut = cf.len() / 3;
    for a in cf.quotients() {
        one.push(a);
    }
    for a in &cf.quotients()[..cut] {
        two.push(a);
    }
    let text = checkpoint::encode(&two).unwrap();
    let mut two: StatAccumulator = checkpoint::decode(&text).unwrap();
    for a in &cf.quotients()[cut..] {
        two.push(a);
    }
    assert_eq!(one.khinchin("x", None).to_csv(), two.khinchin("x", None).to_csv());
    assert_eq!(one.levy("x", None).to_csv(), two.levy("x", None).to_csv());
    assert_eq!(one.histogram().to_csv(), two.histogram().to_csv());
}
