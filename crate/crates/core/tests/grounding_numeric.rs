//! Numeric checks for the grounding kernels: finite-difference agreement of
//! the analytic box-loss gradient, anchor/parser agreement across both
//! tokenization styles, and planted-map recovery by the reference regressor.

use finocr_core::grounding::{
    anchor_windows, box_loss, box_loss_grad, detect_anchors, fit_regressor, giou, iou, BBox,
    BoxLossConfig, FitConfig, HiddenStates,
};
use finocr_core::table::{parse_table, serialize_table};
use finocr_testkit::{
    central_diff, random_table, tokenize_compact_style, tokenize_start_tag_style, TableGen,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Box pairs safely away from the ℓ1 kinks, clamp activity and touching
/// enclosures, where the loss is differentiable.
fn random_nondegenerate_pair(rng: &mut impl Rng) -> (BBox, BBox) {
    loop {
        let make = |rng: &mut dyn rand::RngCore| {
            let x1 = rng.gen_range(0.05..0.55);
            let y1 = rng.gen_range(0.05..0.55);
            let w = rng.gen_range(0.1..0.4);
            let h = rng.gen_range(0.1..0.4);
            BBox::new(x1, y1, w, h)
        };
        let p = make(rng);
        let g = make(rng);
        let distinct = (p.x1 - g.x1).abs() > 1e-3
            && (p.y1 - g.y1).abs() > 1e-3
            && (p.w - g.w).abs() > 1e-3
            && (p.h - g.h).abs() > 1e-3;
        // corner alignment creates kinks in the intersection/enclosure terms
        let corners_apart = (p.x1 + p.w - g.x1 - g.w).abs() > 1e-3
            && (p.y1 + p.h - g.y1 - g.h).abs() > 1e-3
            && (p.x1 + p.w - g.x1).abs() > 1e-3
            && (g.x1 + g.w - p.x1).abs() > 1e-3
            && (p.y1 + p.h - g.y1).abs() > 1e-3
            && (g.y1 + g.h - p.y1).abs() > 1e-3;
        if distinct && corners_apart {
            return (p, g);
        }
    }
}

#[test]
fn analytic_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    let cfg = BoxLossConfig { giou_weight: 0.7 };
    for _ in 0..100 {
        let (pred, gold) = random_nondegenerate_pair(&mut rng);
        let grads = box_loss_grad(&[pred], &[gold], &cfg).unwrap();
        let x = [pred.x1, pred.y1, pred.w, pred.h];
        let f = |v: &[f64]| {
            box_loss(
                &[BBox::new(v[0], v[1], v[2], v[3])],
                &[gold],
                &cfg,
            )
            .unwrap()
        };
        for (i, &analytic) in grads[0].iter().enumerate() {
            let numeric = central_diff(f, &x, i, 1e-6);
            assert!(
                (analytic - numeric).abs() < 1e-5,
                "component {i}: analytic {analytic} vs numeric {numeric} at {pred:?} / {gold:?}"
            );
        }
    }
}

#[test]
fn giou_worked_value_and_relation_to_iou() {
    let a = BBox::new(0.0, 0.0, 0.2, 0.2);
    let b = BBox::new(0.8, 0.8, 0.2, 0.2);
    assert!((giou(&a, &b).unwrap() - (-0.92)).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let (p, g) = random_nondegenerate_pair(&mut rng);
        assert!(giou(&p, &g).unwrap() <= iou(&p, &g) + 1e-12);
        assert!(giou(&p, &g).unwrap() >= -1.0);
        assert!((iou(&p, &g) - iou(&g, &p)).abs() < 1e-15);
    }
}

#[test]
fn anchor_count_matches_parser_cell_count_in_both_styles() {
    let mut rng = ChaCha8Rng::seed_from_u64(4321);
    let cfg = TableGen {
        header_cells_in_body: false,
        max_head_rows: 0, // td-only serialization
        ..TableGen::default()
    };
    for _ in 0..100 {
        let table = random_table(&mut rng, &cfg);
        let html = serialize_table(&table);
        let cells: usize = parse_table(&html)
            .unwrap()
            .logical_rows()
            .map(|r| r.cells.len())
            .sum();
        for tokens in [tokenize_start_tag_style(&html), tokenize_compact_style(&html)] {
            assert_eq!(
                detect_anchors(&tokens).len(),
                cells,
                "style mismatch on {html}"
            );
        }
    }
}

#[test]
fn anchor_windows_pool_adjacent_states() {
    let t = parse_table("<table><tr><td>a</td><td>b</td></tr></table>").unwrap();
    let html = serialize_table(&t);
    let tokens = tokenize_compact_style(&html);
    let dim = 3usize;
    let states: Vec<Vec<f64>> = (0..tokens.len())
        .map(|i| vec![i as f64, i as f64 + 0.5, -(i as f64)])
        .collect();
    let hidden = HiddenStates::new(states).unwrap();
    let windows = anchor_windows(&tokens, &hidden).unwrap();
    assert_eq!(windows.len(), 2);
    for w in &windows {
        assert_eq!(w.pooled.len(), 2 * dim);
        assert_eq!(w.pooled[0], (w.position - 1) as f64);
        assert_eq!(w.pooled[dim], w.position as f64);
    }
}

#[test]
fn reference_regressor_recovers_planted_affine_map() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let dim = 8usize;
    let w: Vec<f64> = (0..4 * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let b: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
    let sigmoid = |z: f64| 1.0 / (1.0 + (-z).exp());
    let pooled: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let targets: Vec<BBox> = pooled
        .iter()
        .map(|s| {
            let mut out = [0.0f64; 4];
            for c in 0..4 {
                let z: f64 = w[c * dim..(c + 1) * dim]
                    .iter()
                    .zip(s)
                    .map(|(wi, xi)| wi * xi)
                    .sum::<f64>()
                    + b[c];
                out[c] = sigmoid(z);
            }
            BBox::new(out[0], out[1], out[2], out[3])
        })
        .collect();
    let (_, loss) = fit_regressor(&pooled, &targets, &FitConfig::default()).unwrap();
    assert!(loss < 1e-3, "final box_loss {loss} not below 1e-3");
}
