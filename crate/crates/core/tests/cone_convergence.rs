use charge_class::cone::{dalembert_solve, kg_solve, wave_estimate_margin, FnSource, ZeroSource};
use charge_class::make_grid;

fn gauss(x: f64, c: f64, w: f64) -> f64 {
    (-((x - c) / w).powi(2)).exp()
}

fn solve(n: usize, m: f64) -> (Vec<f64>, usize) {
    let g = make_grid(-3.0, 3.0, n).unwrap();
    let f: Vec<f64> = g.nodes().map(|x| gauss(x, 0.2, 0.3)).collect();
    let w: Vec<f64> = g.nodes().map(|x| x * gauss(x, -0.1, 0.4)).collect();
    let src = FnSource::new(&g, |s: f64, y: f64| (1.0 + s) * gauss(y, 0.0, 0.5));
    let k = g.steps_for(0.75).unwrap();
    let nodes = g.determinacy_nodes(k).unwrap();
    let lo = *nodes.start();
    (kg_solve(&f, &w, &src, m, &g, 0.75, nodes).unwrap(), lo)
}

#[test]
fn klein_gordon_self_convergence_is_second_order() {
    let sols: Vec<_> = [400, 800, 1600].iter().map(|&n| solve(n, 1.0)).collect();
    // common nodes x = -3 + 6 j / 400
    let diff = |a: &(Vec<f64>, usize), b: &(Vec<f64>, usize), r: usize| {
        let mut worst = 0.0f64;
        for (ia, va) in a.0.iter().enumerate() {
            let node = a.1 + ia;
            let ib = node * r - b.1;
            worst = worst.max((va - b.0[ib]).abs());
        }
        worst
    };
    let e1 = diff(&sols[0], &sols[1], 2);
    let e2 = diff(&sols[1], &sols[2], 2);
    let order = (e1 / e2).log2();
    assert!(order >= 1.9, "{e1:e} {e2:e} order {order}");
}

#[test]
fn dalembert_agrees_with_massless_kernel() {
    let g = make_grid(-3.0, 3.0, 600).unwrap();
    let f: Vec<f64> = g.nodes().map(|x| gauss(x, 0.2, 0.3)).collect();
    let w: Vec<f64> = g.nodes().map(|x| x * gauss(x, -0.1, 0.4)).collect();
    let src = FnSource::new(&g, |s: f64, y: f64| (1.0 + s) * gauss(y, 0.0, 0.5));
    for t in [0.01, 0.5, 1.0] {
        let nodes = g.determinacy_nodes(g.steps_for(t).unwrap()).unwrap();
        let a = kg_solve(&f, &w, &src, 0.0, &g, t, nodes.clone()).unwrap();
        let b = dalembert_solve(&f, &w, &src, &g, t, nodes).unwrap();
        let err = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "t = {t}: {err:e}");
    }
}

#[test]
fn wave_estimate_holds() {
    let g = make_grid(-4.0, 4.0, 800).unwrap();
    let f: Vec<f64> = g
        .nodes()
        .map(|x| gauss(x, 0.2, 0.3) - 0.5 * gauss(x, -0.6, 0.1))
        .collect();
    let w: Vec<f64> = g.nodes().map(|x| 2.0 * x * gauss(x, -0.1, 0.4)).collect();
    let src = FnSource::new(&g, |s: f64, y: f64| (3.0 * s).cos() * gauss(y, 0.3, 0.2));
    for t in [0.1, 0.5, 1.0, 2.0] {
        assert!(wave_estimate_margin(&f, &w, &src, &g, t).unwrap() >= 0.0);
        assert!(wave_estimate_margin(&f, &w, &ZeroSource, &g, t).unwrap() >= 0.0);
    }
}
