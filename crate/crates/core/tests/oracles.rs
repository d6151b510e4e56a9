use grandamalgam::{
    amalgam_norm, grand_norm, grand_seq_norm, holder_pairing, integrate_power_mean, pairing_integral,
    AmalgamOptions, EvalPath, FunctionExpr, GrandExponent, MeasureSpace, NormOptions, QuadratureOptions,
    SequenceData, Subinterval, SweepOptions, Window, WindowMode,
};

/// Dense-grid maximum of `h` over `(0, hi]`, refined around the best point.
fn grid_max(h: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let n = 200_000;
    let (mut best, mut arg) = (f64::NEG_INFINITY, hi);
    for i in 1..=n {
        let e = hi * i as f64 / n as f64;
        let v = h(e);
        if v > best {
            best = v;
            arg = e;
        }
    }
    let step = hi / n as f64;
    for i in 0..=2000 {
        let e = (arg - step + 2.0 * step * i as f64 / 2000.0).clamp(1e-12, hi);
        best = best.max(h(e));
    }
    best
}

fn unit() -> MeasureSpace {
    MeasureSpace::unit()
}

#[test]
fn singular_function_closed_form_and_quadrature() {
    let f = FunctionExpr::power(1.0, 0.0, -0.5);
    let g = GrandExponent::new(2.0, 1.0).unwrap();
    let exact = grand_norm(&f, &g, &unit().region(), &NormOptions::default()).unwrap();
    assert_eq!(exact.path, EvalPath::ClosedForm);
    assert!((exact.value.as_f64() - 2.0).abs() <= 1e-6);
    let opts = NormOptions { force_quadrature: true, ..NormOptions::default() };
    let quad = grand_norm(&f, &g, &unit().region(), &opts).unwrap();
    assert_eq!(quad.path, EvalPath::Quadrature);
    assert!((quad.value.as_f64() - 2.0).abs() <= 1e-4, "{:?}", quad.value);
}

#[test]
fn power_functions_against_dense_grid() {
    // ‖t^a‖_{r} on (0,1) = (a r + 1)^{-1/r}
    for &(p, theta, a) in &[(2.0, 1.0, -0.3), (3.0, 0.5, 0.7), (1.5, 2.0, 2.0), (4.0, 1.0, -0.2)] {
        let f = FunctionExpr::power(1.0, 0.0, a);
        let g = GrandExponent::new(p, theta).unwrap();
        let got = grand_norm(&f, &g, &unit().region(), &NormOptions::default()).unwrap().value.as_f64();
        let want = grid_max(
            |e: f64| {
                let r = p - e;
                e.powf(theta / r) * (a * r + 1.0).powf(-1.0 / r)
            },
            p - 1.0,
        );
        assert!((got - want).abs() <= 1e-6 * want, "p={p} θ={theta} a={a}: {got} vs {want}");
    }
}

#[test]
fn constant_sequence_against_dense_grid() {
    let n = 50;
    let u = SequenceData::new(vec![1.0; n]).unwrap();
    for &(p, theta) in &[(2.0, 1.0), (3.0, 2.0), (1.5, 0.5)] {
        let g = GrandExponent::new(p, theta).unwrap();
        let got = grand_seq_norm(&u, &g, &SweepOptions::default()).unwrap().value.as_f64();
        let want = grid_max(|e: f64| (e.powf(theta) * n as f64).powf(1.0 / (p - e)), p - 1.0);
        assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    }
}

#[test]
fn amalgam_norm_of_constant_is_a_product_of_two_sups() {
    // every window has measure |Q|, so F is constant and the outer sup factors out
    for &(w, p, q) in &[(0.5, 2.0, 2.0), (0.25, 3.0, 1.5)] {
        let g = GrandExponent::new(p, 1.0).unwrap();
        let h = GrandExponent::new(q, 1.0).unwrap();
        let window = Window::new(0.0, w, WindowMode::Periodic).unwrap();
        let got = amalgam_norm(&FunctionExpr::one(), &g, &h, &window, &unit(), &AmalgamOptions::default())
            .unwrap()
            .value()
            .as_f64();
        let inner = grid_max(|e: f64| (e * w).powf(1.0 / (p - e)), p - 1.0);
        let outer = grid_max(|e: f64| e.powf(1.0 / (q - e)), q - 1.0);
        assert!((got - inner * outer).abs() <= 1e-6 * got, "{got} vs {}", inner * outer);
    }
}

#[test]
fn quadrature_of_squared_singular_sum() {
    // ∫ (t^{-1/3} + 1)^2 = ∫ t^{-2/3} + 2 t^{-1/3} + 1 = 3 + 3 + 1
    let f = FunctionExpr::sum(vec![FunctionExpr::power(1.0, 0.0, -1.0 / 3.0), FunctionExpr::one()]);
    let r = integrate_power_mean(&f, 2.0, &Subinterval::new(0.0, 1.0).unwrap(), &QuadratureOptions::default())
        .unwrap();
    assert!((r.value - 7.0).abs() <= 1e-8, "{}", r.value);
}

#[test]
fn pairing_of_two_powers() {
    let f = FunctionExpr::power(1.0, 0.0, -0.5);
    let g = FunctionExpr::power(1.0, 0.0, -0.25);
    let v = pairing_integral(&f, &g, &unit(), &NormOptions::default()).unwrap();
    assert!((v - 4.0).abs() <= 1e-9, "{v}");
}

#[test]
fn holder_pairing_holds_for_constants() {
    let g = GrandExponent::new(2.0, 1.0).unwrap();
    let window = Window::new(0.0, 0.5, WindowMode::Periodic).unwrap();
    let report = holder_pairing(
        &FunctionExpr::one(),
        &FunctionExpr::one(),
        &g,
        &g,
        &window,
        &unit(),
        &AmalgamOptions::default(),
    )
    .unwrap();
    assert!((report.integral - 1.0).abs() <= 1e-12);
    assert!(report.pass, "{report:?}");
}
