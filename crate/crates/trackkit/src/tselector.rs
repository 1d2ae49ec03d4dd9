//! Numeric reference for gated token selection ("T-Selector").
//!
//! A frame's `N x C` token matrix is compressed to `k` tokens in three steps:
//! a gating MLP scores every token, the scores pass through a softmax, and
//! the `k` best-scoring tokens are kept (optionally weighted by their score)
//! and pushed through a projection MLP. The module provides the forward pass,
//! hand-derived analytic gradients, a central-difference gradient checker,
//! the interleaved timestamp/token position layout, and a binary parameter
//! container so runs are reproducible across processes.

use std::cmp::Ordering;
use std::io::{self, Read, Write};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from selector construction, evaluation, and serialization.
#[derive(Debug, Error)]
pub enum SelectorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("k must satisfy 1 <= k <= token count, got k={k} with {n} tokens")]
    InvalidK { k: usize, n: usize },
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("bad parameter container: {0}")]
    BadContainer(String),
}

/// Hidden-layer activation of an [`Mlp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Linear => x,
        }
    }

    /// Derivative expressed through the activated value.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }
}

/// A two-layer perceptron `x -> act(x W1 + b1) W2 + b2` applied row-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    /// `input x hidden`.
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    /// `hidden x output`.
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub activation: Activation,
}

/// Gradients of a loss with respect to one [`Mlp`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl Mlp {
    /// Uniform initialization in `±1/sqrt(fan_in)` per layer, biases zero.
    pub fn random(
        input: usize,
        hidden: usize,
        output: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        let fill = |rows: usize, cols: usize, rng: &mut dyn rand::RngCore| {
            let scale = 1.0 / (rows as f64).sqrt();
            let data: Vec<f64> = (0..rows * cols)
                .map(|_| rng.random_range(-scale..scale))
                .collect();
            Array2::from_shape_vec((rows, cols), data).expect("consistent shape")
        };
        Mlp {
            w1: fill(input, hidden, rng),
            b1: Array1::zeros(hidden),
            w2: fill(hidden, output, rng),
            b2: Array1::zeros(output),
            activation,
        }
    }

    /// An MLP that computes the identity up to padding: inputs pass through
    /// unchanged in the first `min(input, output)` coordinates, extra output
    /// coordinates are zero.
    pub fn identity(input: usize, output: usize) -> Self {
        let mut w1 = Array2::zeros((input, output));
        for i in 0..input.min(output) {
            w1[(i, i)] = 1.0;
        }
        Mlp {
            w1,
            b1: Array1::zeros(output),
            w2: Array2::eye(output),
            b2: Array1::zeros(output),
            activation: Activation::Linear,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.w2.ncols()
    }

    fn validate(&self, name: &str) -> Result<(), SelectorError> {
        if self.b1.len() != self.hidden_dim()
            || self.w2.nrows() != self.hidden_dim()
            || self.b2.len() != self.output_dim()
        {
            return Err(SelectorError::ShapeMismatch(format!(
                "{name} layers disagree: w1 {:?}, b1 {}, w2 {:?}, b2 {}",
                self.w1.dim(),
                self.b1.len(),
                self.w2.dim(),
                self.b2.len()
            )));
        }
        Ok(())
    }

    /// Applies the network to each row of `x`.
    pub fn forward(&self, x: &Array2<f64>) -> Array2<f64> {
        let h = (x.dot(&self.w1) + &self.b1).mapv(|v| self.activation.apply(v));
        h.dot(&self.w2) + &self.b2
    }

    /// Backpropagates `d_out` (same shape as the forward output) through the
    /// network, returning parameter gradients and the gradient at the input.
    pub fn backward(&self, x: &Array2<f64>, d_out: &Array2<f64>) -> (MlpGradients, Array2<f64>) {
        let h = (x.dot(&self.w1) + &self.b1).mapv(|v| self.activation.apply(v));
        let d_w2 = h.t().dot(d_out);
        let d_b2 = d_out.sum_axis(ndarray::Axis(0));
        let d_h = d_out.dot(&self.w2.t());
        let d_pre = &d_h * &h.mapv(|v| self.activation.derivative_from_output(v));
        let d_w1 = x.t().dot(&d_pre);
        let d_b1 = d_pre.sum_axis(ndarray::Axis(0));
        let d_x = d_pre.dot(&self.w1.t());
        (MlpGradients { w1: d_w1, b1: d_b1, w2: d_w2, b2: d_b2 }, d_x)
    }
}

/// Full selector configuration: gate network, projection network, the number
/// of tokens to keep, and whether kept tokens are weighted by their score.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorParams {
    /// Token scorer, `C -> hidden -> 1`.
    pub gate: Mlp,
    /// Compressor applied to kept tokens, `C -> D -> D`.
    pub proj: Mlp,
    /// Number of tokens kept per frame.
    pub k: usize,
    /// Multiply each kept token by its softmax score before projecting. When
    /// disabled the gate influences only *which* tokens survive, so it
    /// receives no gradient.
    pub score_weighting: bool,
}

impl SelectorParams {
    /// Reproducible random initialization from a seed.
    pub fn random(
        c: usize,
        gate_hidden: usize,
        d: usize,
        k: usize,
        score_weighting: bool,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SelectorParams {
            gate: Mlp::random(c, gate_hidden, 1, Activation::Tanh, &mut rng),
            proj: Mlp::random(c, d, d, Activation::Tanh, &mut rng),
            k,
            score_weighting,
        }
    }

    /// Token feature dimension the selector expects.
    pub fn input_dim(&self) -> usize {
        self.gate.input_dim()
    }

    fn validate(&self) -> Result<(), SelectorError> {
        self.gate.validate("gate")?;
        self.proj.validate("proj")?;
        if self.gate.output_dim() != 1 {
            return Err(SelectorError::ShapeMismatch(format!(
                "gate must produce one logit per token, got output dim {}",
                self.gate.output_dim()
            )));
        }
        if self.proj.input_dim() != self.gate.input_dim() {
            return Err(SelectorError::ShapeMismatch(format!(
                "gate consumes {}-dim tokens but proj consumes {}-dim",
                self.gate.input_dim(),
                self.proj.input_dim()
            )));
        }
        Ok(())
    }
}

/// Output of one selector forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Softmax score of every input token.
    pub scores: Array1<f64>,
    /// Indices of the kept tokens, in their original (ascending) order.
    pub indices: Vec<usize>,
    /// Projected compressed tokens, `k x D`, rows ordered like `indices`.
    pub output: Array2<f64>,
}

/// Gradients of a scalar loss with respect to everything the selector reads.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorGradients {
    /// Gradient at the input token matrix, `N x C`.
    pub tokens: Array2<f64>,
    pub gate: MlpGradients,
    pub proj: MlpGradients,
}

/// Numerically stable softmax.
fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let mut e = logits.mapv(|v| (v - max).exp());
    let sum = e.sum();
    e.mapv_inplace(|v| v / sum);
    e
}

fn validate_tokens(tokens: &Array2<f64>, params: &SelectorParams) -> Result<(), SelectorError> {
    params.validate()?;
    if tokens.nrows() == 0 || tokens.ncols() != params.input_dim() {
        return Err(SelectorError::ShapeMismatch(format!(
            "token matrix {:?} incompatible with {}-dim selector",
            tokens.dim(),
            params.input_dim()
        )));
    }
    if tokens.iter().any(|v| !v.is_finite()) {
        return Err(SelectorError::NonFinite("token matrix"));
    }
    Ok(())
}

/// Softmax scores for every token under the gate network.
pub fn gate_scores(tokens: &Array2<f64>, params: &SelectorParams) -> Result<Array1<f64>, SelectorError> {
    validate_tokens(tokens, params)?;
    let logits_mat = params.gate.forward(tokens);
    let logits = Array1::from_iter(logits_mat.column(0).iter().copied());
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(SelectorError::NonFinite("gate logits"));
    }
    Ok(softmax(&logits))
}

/// Indices of the `k` highest-scoring tokens.
///
/// Ties break toward the lower index, and the returned indices are sorted
/// ascending so kept tokens preserve their original order.
pub fn keep_top_k(scores: &Array1<f64>, k: usize) -> Result<Vec<usize>, SelectorError> {
    let n = scores.len();
    if k < 1 || k > n {
        return Err(SelectorError::InvalidK { k, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        scores[j]
            .partial_cmp(&scores[i])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut keep = order[..k].to_vec();
    keep.sort_unstable();
    Ok(keep)
}

/// Full selector forward pass on one frame's token matrix.
pub fn forward(tokens: &Array2<f64>, params: &SelectorParams) -> Result<SelectionResult, SelectorError> {
    let scores = gate_scores(tokens, params)?;
    let indices = keep_top_k(&scores, params.k)?;
    let mut gathered = Array2::zeros((params.k, tokens.ncols()));
    for (row, &i) in indices.iter().enumerate() {
        let weight = if params.score_weighting { scores[i] } else { 1.0 };
        gathered.row_mut(row).assign(&(&tokens.row(i) * weight));
    }
    let output = params.proj.forward(&gathered);
    Ok(SelectionResult { scores, indices, output })
}

/// Analytic gradients of a scalar loss through the selector.
///
/// `d_output` is the upstream gradient at [`SelectionResult::output`]
/// (`k x D`). Selection itself is treated as locally constant, which is exact
/// everywhere off the tie manifold; with score weighting the gate receives
/// gradient through the kept scores and through the softmax coupling to every
/// other token, and without it the gate gradient is exactly zero.
pub fn backward(
    tokens: &Array2<f64>,
    params: &SelectorParams,
    d_output: &Array2<f64>,
) -> Result<SelectorGradients, SelectorError> {
    let scores = gate_scores(tokens, params)?;
    let indices = keep_top_k(&scores, params.k)?;
    if d_output.dim() != (params.k, params.proj.output_dim()) {
        return Err(SelectorError::ShapeMismatch(format!(
            "upstream gradient {:?}, expected ({}, {})",
            d_output.dim(),
            params.k,
            params.proj.output_dim()
        )));
    }

    let mut gathered = Array2::zeros((params.k, tokens.ncols()));
    for (row, &i) in indices.iter().enumerate() {
        let weight = if params.score_weighting { scores[i] } else { 1.0 };
        gathered.row_mut(row).assign(&(&tokens.row(i) * weight));
    }
    let (proj_grads, d_gathered) = params.proj.backward(&gathered, d_output);

    let n = tokens.nrows();
    let mut d_tokens = Array2::zeros(tokens.raw_dim());
    let mut d_scores = Array1::zeros(n);
    for (row, &i) in indices.iter().enumerate() {
        if params.score_weighting {
            d_tokens
                .row_mut(i)
                .zip_mut_with(&d_gathered.row(row), |t, &g| *t += scores[i] * g);
            d_scores[i] += d_gathered.row(row).dot(&tokens.row(i));
        } else {
            d_tokens
                .row_mut(i)
                .zip_mut_with(&d_gathered.row(row), |t, &g| *t += g);
        }
    }

    // Softmax backward: dl_i = s_i (ds_i - sum_m ds_m s_m).
    let weighted_sum = d_scores.dot(&scores);
    let d_logits = Array2::from_shape_fn((n, 1), |(i, _)| scores[i] * (d_scores[i] - weighted_sum));
    let (gate_grads, d_tokens_gate) = params.gate.backward(tokens, &d_logits);
    d_tokens += &d_tokens_gate;

    Ok(SelectorGradients { tokens: d_tokens, gate: gate_grads, proj: proj_grads })
}

/// Outcome of a finite-difference gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Worst relative error across every checked coordinate.
    pub max_rel_error: f64,
    /// Which coordinate produced it, e.g. `proj.w1[3]`.
    pub worst_coord: String,
    pub coords_checked: usize,
    /// Softmax score gap between the k-th and (k+1)-th ranked token;
    /// infinite when every token is kept. Checks run near a selection tie
    /// are meaningless, so callers should re-seed when this is tiny.
    pub boundary_gap: f64,
}

/// Relative error with an absolute floor so near-zero gradients compare
/// against finite-difference noise rather than against each other.
fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-5)
}

/// Central-difference check of [`backward`] against the loss
/// `sum(forward(tokens).output)`, perturbing every coordinate of the token
/// matrix and of all eight parameter arrays.
pub fn gradient_check(
    tokens: &Array2<f64>,
    params: &SelectorParams,
    epsilon: f64,
) -> Result<GradCheckReport, SelectorError> {
    let base = forward(tokens, params)?;
    let boundary_gap = if params.k == base.scores.len() {
        f64::INFINITY
    } else {
        let mut sorted: Vec<f64> = base.scores.to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
        sorted[params.k - 1] - sorted[params.k]
    };

    let ones = Array2::ones(base.output.raw_dim());
    let grads = backward(tokens, params, &ones)?;

    let loss = |tokens: &Array2<f64>, params: &SelectorParams| -> Result<f64, SelectorError> {
        Ok(forward(tokens, params)?.output.sum())
    };

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_coord: String::new(),
        coords_checked: 0,
        boundary_gap,
    };
    let record = |report: &mut GradCheckReport, name: String, analytic: f64, numeric: f64| {
        let err = rel_error(analytic, numeric);
        report.coords_checked += 1;
        if err > report.max_rel_error {
            report.max_rel_error = err;
            report.worst_coord = name;
        }
    };

    // Token coordinates.
    {
        let mut probe = tokens.clone();
        let flat_grads = grads.tokens.as_slice().expect("standard layout").to_vec();
        let len = probe.len();
        for idx in 0..len {
            let slice = probe.as_slice_mut().expect("standard layout");
            let orig = slice[idx];
            slice[idx] = orig + epsilon;
            let up = loss(&probe, params)?;
            probe.as_slice_mut().expect("standard layout")[idx] = orig - epsilon;
            let down = loss(&probe, params)?;
            probe.as_slice_mut().expect("standard layout")[idx] = orig;
            let numeric = (up - down) / (2.0 * epsilon);
            record(&mut report, format!("tokens[{idx}]"), flat_grads[idx], numeric);
        }
    }

    // Parameter coordinates: the eight arrays in container order.
    for slot in 0..8 {
        let analytic_flat: Vec<f64> = {
            let view = grad_slot(&grads, slot);
            view.to_vec()
        };
        for idx in 0..analytic_flat.len() {
            let mut probe = params.clone();
            *param_slot_mut(&mut probe, slot, idx) += epsilon;
            let up = loss(tokens, &probe)?;
            *param_slot_mut(&mut probe, slot, idx) -= 2.0 * epsilon;
            let down = loss(tokens, &probe)?;
            let numeric = (up - down) / (2.0 * epsilon);
            record(
                &mut report,
                format!("{}[{idx}]", SLOT_NAMES[slot]),
                analytic_flat[idx],
                numeric,
            );
        }
    }
    Ok(report)
}

const SLOT_NAMES: [&str; 8] = [
    "gate.w1", "gate.b1", "gate.w2", "gate.b2", "proj.w1", "proj.b1", "proj.w2", "proj.b2",
];

fn grad_slot(g: &SelectorGradients, slot: usize) -> Vec<f64> {
    match slot {
        0 => g.gate.w1.iter().copied().collect(),
        1 => g.gate.b1.to_vec(),
        2 => g.gate.w2.iter().copied().collect(),
        3 => g.gate.b2.to_vec(),
        4 => g.proj.w1.iter().copied().collect(),
        5 => g.proj.b1.to_vec(),
        6 => g.proj.w2.iter().copied().collect(),
        7 => g.proj.b2.to_vec(),
        _ => unreachable!(),
    }
}

fn param_slot_mut(p: &mut SelectorParams, slot: usize, idx: usize) -> &mut f64 {
    match slot {
        0 => &mut p.gate.w1.as_slice_mut().expect("standard layout")[idx],
        1 => &mut p.gate.b1.as_slice_mut().expect("standard layout")[idx],
        2 => &mut p.gate.w2.as_slice_mut().expect("standard layout")[idx],
        3 => &mut p.gate.b2.as_slice_mut().expect("standard layout")[idx],
        4 => &mut p.proj.w1.as_slice_mut().expect("standard layout")[idx],
        5 => &mut p.proj.b1.as_slice_mut().expect("standard layout")[idx],
        6 => &mut p.proj.w2.as_slice_mut().expect("standard layout")[idx],
        7 => &mut p.proj.b2.as_slice_mut().expect("standard layout")[idx],
        _ => unreachable!(),
    }
}

/// One frame's slot in the interleaved position layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSlot {
    pub frame_index: u64,
    /// Position of the frame's timestamp token.
    pub timestamp_position: usize,
    /// Half-open position range `[start, end)` of the frame's kept tokens.
    pub token_span: (usize, usize),
}

/// Position layout for a clip: per frame, one timestamp position followed by
/// `k` token positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenLayout {
    pub slots: Vec<FrameSlot>,
    pub total_positions: usize,
}

/// Lays out `frame_indices` with `k` kept tokens per frame.
pub fn timestamp_layout(frame_indices: &[u64], k: usize) -> TokenLayout {
    let mut slots = Vec::with_capacity(frame_indices.len());
    let mut pos = 0;
    for &frame_index in frame_indices {
        let timestamp_position = pos;
        let token_span = (pos + 1, pos + 1 + k);
        slots.push(FrameSlot { frame_index, timestamp_position, token_span });
        pos = token_span.1;
    }
    TokenLayout { slots, total_positions: pos }
}

const CONTAINER_FORMAT: &str = "trackkit-tselector";
const CONTAINER_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ContainerHeader {
    format: String,
    version: u32,
    c: usize,
    gate_hidden: usize,
    d: usize,
    k: usize,
    score_weighting: bool,
    gate_activation: Activation,
    proj_activation: Activation,
}

/// Writes a selector to the flat binary container: a little-endian `u32`
/// header length, a JSON header describing shapes, then the eight weight
/// arrays as little-endian `f64` in fixed order (`gate.w1, gate.b1, gate.w2,
/// gate.b2, proj.w1, proj.b1, proj.w2, proj.b2`, matrices row-major).
pub fn save_params<W: Write>(params: &SelectorParams, mut w: W) -> Result<(), SelectorError> {
    params.validate()?;
    let header = ContainerHeader {
        format: CONTAINER_FORMAT.to_string(),
        version: CONTAINER_VERSION,
        c: params.input_dim(),
        gate_hidden: params.gate.hidden_dim(),
        d: params.proj.output_dim(),
        k: params.k,
        score_weighting: params.score_weighting,
        gate_activation: params.gate.activation,
        proj_activation: params.proj.activation,
    };
    let header_bytes = serde_json::to_vec(&header).expect("header serializes");
    w.write_all(&(header_bytes.len() as u32).to_le_bytes())?;
    w.write_all(&header_bytes)?;
    write_f64s(&mut w, params.gate.w1.iter())?;
    write_f64s(&mut w, params.gate.b1.iter())?;
    write_f64s(&mut w, params.gate.w2.iter())?;
    write_f64s(&mut w, params.gate.b2.iter())?;
    write_f64s(&mut w, params.proj.w1.iter())?;
    write_f64s(&mut w, params.proj.b1.iter())?;
    write_f64s(&mut w, params.proj.w2.iter())?;
    write_f64s(&mut w, params.proj.b2.iter())?;
    Ok(())
}

fn write_f64s<'a, W: Write>(
    w: &mut W,
    values: impl Iterator<Item = &'a f64>,
) -> Result<(), SelectorError> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a selector from the container format written by [`save_params`].
pub fn load_params<R: Read>(mut r: R) -> Result<SelectorParams, SelectorError> {
    let mut len_bytes = [0u8; 4];
    r.read_exact(&mut len_bytes)?;
    let header_len = u32::from_le_bytes(len_bytes) as usize;
    if header_len == 0 || header_len > 1 << 20 {
        return Err(SelectorError::BadContainer(format!(
            "implausible header length {header_len}"
        )));
    }
    let mut header_bytes = vec![0u8; header_len];
    r.read_exact(&mut header_bytes)?;
    let header: ContainerHeader = serde_json::from_slice(&header_bytes)
        .map_err(|e| SelectorError::BadContainer(format!("header: {e}")))?;
    if header.format != CONTAINER_FORMAT {
        return Err(SelectorError::BadContainer(format!(
            "format {:?}, expected {CONTAINER_FORMAT:?}",
            header.format
        )));
    }
    if header.version != CONTAINER_VERSION {
        return Err(SelectorError::BadContainer(format!(
            "unsupported version {}",
            header.version
        )));
    }
    if header.c == 0 || header.gate_hidden == 0 || header.d == 0 || header.k == 0 {
        return Err(SelectorError::BadContainer("zero dimension".to_string()));
    }

    let mut read_vec = |count: usize| -> Result<Vec<f64>, SelectorError> {
        let mut buf = vec![0u8; count * 8];
        r.read_exact(&mut buf)?;
        Ok(buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    };
    let (c, h, d) = (header.c, header.gate_hidden, header.d);
    let gate_w1 = Array2::from_shape_vec((c, h), read_vec(c * h)?).expect("shape");
    let gate_b1 = Array1::from_vec(read_vec(h)?);
    let gate_w2 = Array2::from_shape_vec((h, 1), read_vec(h)?).expect("shape");
    let gate_b2 = Array1::from_vec(read_vec(1)?);
    let proj_w1 = Array2::from_shape_vec((c, d), read_vec(c * d)?).expect("shape");
    let proj_b1 = Array1::from_vec(read_vec(d)?);
    let proj_w2 = Array2::from_shape_vec((d, d), read_vec(d * d)?).expect("shape");
    let proj_b2 = Array1::from_vec(read_vec(d)?);

    let mut trailing = [0u8; 1];
    match r.read(&mut trailing)? {
        0 => {}
        _ => return Err(SelectorError::BadContainer("trailing data".to_string())),
    }

    let params = SelectorParams {
        gate: Mlp {
            w1: gate_w1,
            b1: gate_b1,
            w2: gate_w2,
            b2: gate_b2,
            activation: header.gate_activation,
        },
        proj: Mlp {
            w1: proj_w1,
            b1: proj_b1,
            w2: proj_w2,
            b2: proj_b2,
            activation: header.proj_activation,
        },
        k: header.k,
        score_weighting: header.score_weighting,
    };
    params.validate()?;
    Ok(params)
}
