//! Cell-level grounding primitives: structural anchor-token detection over
//! HTML token streams, anchor-window pooling of decoder hidden states, box
//! parameterization, the ℓ1 + GIoU box loss with analytic gradients, and a
//! minimal reference regressor for end-to-end gradient checks.
//!
//! The crate never runs a model; token sequences and hidden-state vectors
//! are opaque numeric inputs produced elsewhere. Token positions are
//! 1-based throughout.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GroundingError {
    #[error("vector dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("pred and gold lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("both boxes have zero area; enclosing box is degenerate")]
    DegenerateEnclosure,
}

/// Axis-aligned box: top-left corner plus width/height, normalized to the
/// page so all components live in [0, 1] for valid boxes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, w: f64, h: f64) -> Self {
        BBox { x1, y1, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// Decoder hidden states aligned with a token sequence; all vectors share
/// one dimension.
#[derive(Debug, Clone)]
pub struct HiddenStates {
    vectors: Vec<Vec<f64>>,
    dim: usize,
}

impl HiddenStates {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self, GroundingError> {
        let dim = vectors.first().map(Vec::len).unwrap_or(0);
        for v in &vectors {
            if v.len() != dim {
                return Err(GroundingError::DimMismatch(dim, v.len()));
            }
        }
        Ok(HiddenStates { vectors, dim })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Vector at a 1-based token position.
    pub fn at(&self, position: usize) -> &[f64] {
        &self.vectors[position - 1]
    }
}

/// Pooled representation of one cell's two-token anchor window.
#[derive(Debug, Clone)]
pub struct AnchorWindow {
    /// Cell index k, 0-based in document order.
    pub cell_index: usize,
    /// Anchor position P_k, 1-based.
    pub position: usize,
    pub pooled: Vec<f64>,
}

/// Find the 1-based positions where a cell start tag begins, under both
/// serialization styles: a `"<td"` start-tag token, or the position after a
/// `"><"` tag-boundary token followed by a bare `"td"` token. A position
/// matched by both rules is counted once.
pub fn detect_anchors(tokens: &[String]) -> Vec<usize> {
    let mut anchors = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if tok == "<td" {
            anchors.push(i + 1);
        }
        if tok == "><" && tokens.get(i + 1).is_some_and(|t| t == "td") {
            anchors.push(i + 2);
        }
    }
    anchors.sort_unstable();
    anchors.dedup();
    anchors
}

/// Pool the two window states by concatenation: the result keeps both token
/// states losslessly and has dimension 2D.
pub fn pool_window(h_p: &[f64], h_p1: &[f64]) -> Result<Vec<f64>, GroundingError> {
    if h_p.len() != h_p1.len() {
        return Err(GroundingError::DimMismatch(h_p.len(), h_p1.len()));
    }
    let mut pooled = Vec::with_capacity(h_p.len() * 2);
    pooled.extend_from_slice(h_p);
    pooled.extend_from_slice(h_p1);
    Ok(pooled)
}

/// Detect anchors and pool each one's two-token window. Anchors at the very
/// last position have no following token and are dropped.
pub fn anchor_windows(
    tokens: &[String],
    hidden: &HiddenStates,
) -> Result<Vec<AnchorWindow>, GroundingError> {
    if tokens.len() != hidden.len() {
        return Err(GroundingError::LengthMismatch(tokens.len(), hidden.len()));
    }
    let mut windows = Vec::new();
    for (cell_index, &p) in detect_anchors(tokens)
        .iter()
        .filter(|&&p| p < tokens.len())
        .enumerate()
    {
        windows.push(AnchorWindow {
            cell_index,
            position: p,
            pooled: pool_window(hidden.at(p), hidden.at(p + 1))?,
        });
    }
    Ok(windows)
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Convert to corner form (x1, y1, x1+w, y1+h) with every component clamped
/// into [0, 1].
pub fn xywh_to_xyxy_clamped(b: &BBox) -> [f64; 4] {
    [
        clamp01(b.x1),
        clamp01(b.y1),
        clamp01(b.x1 + b.w),
        clamp01(b.y1 + b.h),
    ]
}

fn corner_intersection(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let iw = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let ih = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    iw * ih
}

/// Intersection over union on raw corner coordinates; 0 when the union has
/// zero area.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let ca = [a.x1, a.y1, a.x1 + a.w, a.y1 + a.h];
    let cb = [b.x1, b.y1, b.x1 + b.w, b.y1 + b.h];
    let inter = corner_intersection(&ca, &cb);
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Generalized IoU: IoU minus the enclosing-box penalty
/// (area(enclosing) − area(union)) / area(enclosing). Corners are clamped
/// into [0, 1] first. Errors when both boxes have zero area.
pub fn giou(a: &BBox, b: &BBox) -> Result<f64, GroundingError> {
    let ca = xywh_to_xyxy_clamped(a);
    let cb = xywh_to_xyxy_clamped(b);
    let area_a = (ca[2] - ca[0]) * (ca[3] - ca[1]);
    let area_b = (cb[2] - cb[0]) * (cb[3] - cb[1]);
    let inter = corner_intersection(&ca, &cb);
    let union = area_a + area_b - inter;
    let ew = ca[2].max(cb[2]) - ca[0].min(cb[0]);
    let eh = ca[3].max(cb[3]) - ca[1].min(cb[1]);
    let enclose = ew * eh;
    if enclose <= 0.0 {
        return Err(GroundingError::DegenerateEnclosure);
    }
    let iou = if union <= 0.0 { 0.0 } else { inter / union };
    Ok(iou - (enclose - union) / enclose)
}

/// Weighting of the GIoU term inside [`box_loss`].
#[derive(Debug, Clone, Copy, Default)]
pub struct BoxLossConfig {
    pub giou_weight: f64,
}

/// Mean ℓ1 distance over the four box components, plus
/// `giou_weight · mean(1 − GIoU)`.
pub fn box_loss(pred: &[BBox], gold: &[BBox], cfg: &BoxLossConfig) -> Result<f64, GroundingError> {
    if pred.len() != gold.len() || pred.is_empty() {
        return Err(GroundingError::LengthMismatch(pred.len(), gold.len()));
    }
    let m = pred.len() as f64;
    let mut total = 0.0;
    for (p, g) in pred.iter().zip(gold) {
        total += (p.x1 - g.x1).abs()
            + (p.y1 - g.y1).abs()
            + (p.w - g.w).abs()
            + (p.h - g.h).abs();
    }
    let mut loss = total / m;
    if cfg.giou_weight > 0.0 {
        let mut penalty = 0.0;
        for (p, g) in pred.iter().zip(gold) {
            penalty += 1.0 - giou(p, g)?;
        }
        loss += cfg.giou_weight * penalty / m;
    }
    Ok(loss)
}

/// GIoU and its gradient w.r.t. the predicted (x1, y1, w, h), chained
/// through the corner conversion and clamp. Gradients vanish for clamped
/// components, matching the forward computation.
fn giou_with_grad(pred: &BBox, gold: &BBox) -> Result<(f64, [f64; 4]), GroundingError> {
    let raw = [pred.x1, pred.y1, pred.x1 + pred.w, pred.y1 + pred.h];
    let ca = raw.map(clamp01);
    let active = raw.map(|v| (0.0..=1.0).contains(&v));
    let cb = xywh_to_xyxy_clamped(gold);

    let (aw, ah) = (ca[2] - ca[0], ca[3] - ca[1]);
    let area_a = aw * ah;
    let area_b = (cb[2] - cb[0]) * (cb[3] - cb[1]);

    let ix2 = ca[2].min(cb[2]);
    let iy2 = ca[3].min(cb[3]);
    let iw = (ix2 - ca[0].max(cb[0])).max(0.0);
    let ih = (iy2 - ca[1].max(cb[1])).max(0.0);
    let inter = iw * ih;
    let union = area_a + area_b - inter;

    let (ew, eh) = (
        ca[2].max(cb[2]) - ca[0].min(cb[0]),
        ca[3].max(cb[3]) - ca[1].min(cb[1]),
    );
    let enclose = ew * eh;
    if enclose <= 0.0 {
        return Err(GroundingError::DegenerateEnclosure);
    }

    let iou = if union <= 0.0 { 0.0 } else { inter / union };
    let value = iou - (enclose - union) / enclose;

    // Partials w.r.t. the clamped corners [x1c, y1c, x2c, y2c].
    let d_area = [-ah, -aw, ah, aw];
    let overlapping = iw > 0.0 && ih > 0.0;
    let d_inter = [
        if overlapping && ca[0] >= cb[0] { -ih } else { 0.0 },
        if overlapping && ca[1] >= cb[1] { -iw } else { 0.0 },
        if overlapping && ca[2] <= cb[2] { ih } else { 0.0 },
        if overlapping && ca[3] <= cb[3] { iw } else { 0.0 },
    ];
    let d_enclose = [
        if ca[0] <= cb[0] { -eh } else { 0.0 },
        if ca[1] <= cb[1] { -ew } else { 0.0 },
        if ca[2] >= cb[2] { eh } else { 0.0 },
        if ca[3] >= cb[3] { ew } else { 0.0 },
    ];

    let mut d_corner = [0.0f64; 4];
    for c in 0..4 {
        let d_union = d_area[c] - d_inter[c];
        let d_iou = if union > 0.0 {
            d_inter[c] / union - inter * d_union / (union * union)
        } else {
            0.0
        };
        // −(E−U)/E = U/E − 1, so the penalty term differentiates to
        // dU/E − U·dE/E².
        let d_penalty = d_union / enclose - union * d_enclose[c] / (enclose * enclose);
        d_corner[c] = if active[c] { d_iou + d_penalty } else { 0.0 };
    }
    // Chain to (x1, y1, w, h): x2 = x1 + w, y2 = y1 + h.
    let grad = [
        d_corner[0] + d_corner[2],
        d_corner[1] + d_corner[3],
        d_corner[2],
        d_corner[3],
    ];
    Ok((value, grad))
}

/// Analytic gradient of [`box_loss`] w.r.t. each predicted box; the ℓ1
/// subgradient at zero is taken as 0.
pub fn box_loss_grad(
    pred: &[BBox],
    gold: &[BBox],
    cfg: &BoxLossConfig,
) -> Result<Vec<[f64; 4]>, GroundingError> {
    if pred.len() != gold.len() {
        return Err(GroundingError::LengthMismatch(pred.len(), gold.len()));
    }
    let m = pred.len() as f64;
    let mut grads = Vec::with_capacity(pred.len());
    for (p, g) in pred.iter().zip(gold) {
        let diffs = [p.x1 - g.x1, p.y1 - g.y1, p.w - g.w, p.h - g.h];
        let mut grad = diffs.map(|d| {
            if d > 0.0 {
                1.0 / m
            } else if d < 0.0 {
                -1.0 / m
            } else {
                0.0
            }
        });
        if cfg.giou_weight > 0.0 {
            let (_, giou_grad) = giou_with_grad(p, g)?;
            for c in 0..4 {
                grad[c] -= cfg.giou_weight * giou_grad[c] / m;
            }
        }
        grads.push(grad);
    }
    Ok(grads)
}

/// Parameters of the reference regressor: an affine map from pooled anchor
/// windows to four logits, squashed componentwise into [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorParams {
    pub in_dim: usize,
    /// Row-major 4 × in_dim weight matrix.
    pub weights: Vec<f64>,
    pub bias: [f64; 4],
}

impl RegressorParams {
    pub fn zeros(in_dim: usize) -> Self {
        RegressorParams {
            in_dim,
            weights: vec![0.0; 4 * in_dim],
            bias: [0.0; 4],
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn forward(params: &RegressorParams, pooled: &[f64]) -> [f64; 4] {
    let mut out = [0.0f64; 4];
    for (c, slot) in out.iter_mut().enumerate() {
        let row = &params.weights[c * params.in_dim..(c + 1) * params.in_dim];
        let z: f64 = row.iter().zip(pooled).map(|(w, x)| w * x).sum::<f64>() + params.bias[c];
        *slot = sigmoid(z);
    }
    out
}

/// Apply the reference regressor to each window. The logistic squash keeps
/// every output component inside [0, 1]; zero parameters map everything to
/// (0.5, 0.5, 0.5, 0.5).
pub fn regress_boxes(
    windows: &[AnchorWindow],
    params: &RegressorParams,
) -> Result<Vec<BBox>, GroundingError> {
    let mut boxes = Vec::with_capacity(windows.len());
    for w in windows {
        if w.pooled.len() != params.in_dim {
            return Err(GroundingError::DimMismatch(params.in_dim, w.pooled.len()));
        }
        let [x1, y1, bw, bh] = forward(params, &w.pooled);
        boxes.push(BBox::new(x1, y1, bw, bh));
    }
    Ok(boxes)
}

/// Gradient-descent schedule for [`fit_regressor`].
#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub steps: usize,
    pub learning_rate: f64,
    /// Halve the learning rate every this many steps.
    pub lr_halflife: usize,
    pub giou_weight: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            steps: 5_000,
            learning_rate: 0.05,
            lr_halflife: 500,
            giou_weight: 0.0,
        }
    }
}

/// Fit the reference regressor on (pooled window, box) pairs by Adam descent
/// on the box-loss subgradient. Deterministic: parameters start at zero and
/// no randomness is involved. Returns the fitted parameters and the final
/// loss.
pub fn fit_regressor(
    pooled: &[Vec<f64>],
    targets: &[BBox],
    cfg: &FitConfig,
) -> Result<(RegressorParams, f64), GroundingError> {
    if pooled.len() != targets.len() || pooled.is_empty() {
        return Err(GroundingError::LengthMismatch(pooled.len(), targets.len()));
    }
    let in_dim = pooled[0].len();
    for p in pooled {
        if p.len() != in_dim {
            return Err(GroundingError::DimMismatch(in_dim, p.len()));
        }
    }
    let loss_cfg = BoxLossConfig {
        giou_weight: cfg.giou_weight,
    };
    let n_params = 4 * in_dim + 4;
    let mut params = RegressorParams::zeros(in_dim);
    let (mut m1, mut m2) = (vec![0.0f64; n_params], vec![0.0f64; n_params]);
    let (beta1, beta2, eps) = (0.9, 0.999, 1e-8);

    let predict = |params: &RegressorParams| -> Vec<BBox> {
        pooled
            .iter()
            .map(|s| {
                let [x1, y1, w, h] = forward(params, s);
                BBox::new(x1, y1, w, h)
            })
            .collect()
    };

    for step in 0..cfg.steps {
        let preds = predict(&params);
        let box_grads = box_loss_grad(&preds, targets, &loss_cfg)?;

        let mut grad = vec![0.0f64; n_params];
        for ((s, pred), g) in pooled.iter().zip(&preds).zip(&box_grads) {
            let comps = [pred.x1, pred.y1, pred.w, pred.h];
            for c in 0..4 {
                // Chain through the logistic squash.
                let delta = g[c] * comps[c] * (1.0 - comps[c]);
                for (d, x) in s.iter().enumerate() {
                    grad[c * in_dim + d] += delta * x;
                }
                grad[4 * in_dim + c] += delta;
            }
        }

        let lr = cfg.learning_rate * 0.5f64.powf(step as f64 / cfg.lr_halflife as f64);
        let t = (step + 1) as f64;
        for i in 0..n_params {
            m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
            m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
            let m1_hat = m1[i] / (1.0 - beta1.powf(t));
            let m2_hat = m2[i] / (1.0 - beta2.powf(t));
            let update = lr * m1_hat / (m2_hat.sqrt() + eps);
            if i < 4 * in_dim {
                params.weights[i] -= update;
            } else {
                params.bias[i - 4 * in_dim] -= update;
            }
        }
    }

    let final_loss = box_loss(&predict(&params), targets, &loss_cfg)?;
    Ok((params, final_loss))
}
