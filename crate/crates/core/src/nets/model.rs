use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::{baseline, Features, Scales};
use super::friction_lq::rnea_lq_fit;
use super::init::{init_params, InitScheme};
use super::lagrangian::{delan_torque_at, lnn_torque_at, InertiaFn};
use super::mlp::{mlp_eval, Activation, MlpOutput, MlpSpec, NetworkParams};
use crate::autodiff::jet::{JetLayout, JetTrace, Jets};
use crate::autodiff::{gradient_at, ParamFn, Real, Tape};
use crate::data::{Dataset, Normalization, TargetKind};
use crate::dynamics::{JointState, RobotModel};
use crate::{Error, Result};

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    #[serde(rename = "mlp")]
    Mlp,
    #[serde(rename = "delan")]
    Delan,
    #[serde(rename = "lnn")]
    Lnn,
    #[serde(rename = "lnn_mlp")]
    LnnMlp,
    #[serde(rename = "rnea_mlp")]
    RneaMlp,
    #[serde(rename = "rnea_lq")]
    RneaLq,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Mlp,
        Variant::Delan,
        Variant::Lnn,
        Variant::LnnMlp,
        Variant::RneaMlp,
        Variant::RneaLq,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Variant::Mlp => "mlp",
            Variant::Delan => "delan",
            Variant::Lnn => "lnn",
            Variant::LnnMlp => "lnn_mlp",
            Variant::RneaMlp => "rnea_mlp",
            Variant::RneaLq => "rnea_lq",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Mlp => "MLP",
            Variant::Delan => "DeLaN",
            Variant::Lnn => "LNN",
            Variant::LnnMlp => "LNN+MLP",
            Variant::RneaMlp => "RNEA+MLP",
            Variant::RneaLq => "RNEA+LQ",
        }
    }

    /// Accepts the tag (`lnn_mlp`) or the label (`LNN+MLP`), any case.
    pub fn parse(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.tag().eq_ignore_ascii_case(s) || v.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "variant",
                name: s.to_string(),
            })
    }

    pub fn needs_robot(self) -> bool {
        matches!(self, Variant::RneaMlp | Variant::RneaLq)
    }

    pub fn is_trainable(self) -> bool {
        self != Variant::RneaLq
    }

    pub fn default_init(self) -> InitScheme {
        match self {
            Variant::Delan | Variant::Lnn | Variant::LnnMlp => InitScheme::Lagrangian,
            _ => InitScheme::UniformFan,
        }
    }

    fn has_correction(self) -> bool {
        matches!(self, Variant::LnnMlp | Variant::RneaMlp)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// How DeLaN produces its gravity term.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum GravityHead {
    /// `n` direct network outputs.
    #[default]
    Direct,
    /// Gradient of a scalar potential output.
    Potential,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(default)]
pub struct ModelConfig {
    pub hidden_layers: usize,
    pub width: usize,
    pub activation: Activation,
    /// Correction MLP size for the hybrid variants; defaults to the main size.
    pub correction_hidden_layers: Option<usize>,
    pub correction_width: Option<usize>,
    /// Defaults per variant, see [`Variant::default_init`].
    pub init: Option<InitScheme>,
    /// Added to the softplus diagonal of the DeLaN inertia factor.
    pub epsilon_pd: f64,
    pub gravity_head: GravityHead,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden_layers: 2,
            width: 64,
            activation: Activation::Tanh,
            correction_hidden_layers: None,
            correction_width: None,
            init: None,
            epsilon_pd: 1e-4,
            gravity_head: GravityHead::Direct,
        }
    }
}

impl ModelConfig {
    pub fn sized(hidden_layers: usize, width: usize) -> Self {
        ModelConfig {
            hidden_layers,
            width,
            ..Default::default()
        }
    }

    fn main_spec(&self, variant: Variant, n: usize) -> Option<MlpSpec> {
        let (input, output) = match variant {
            Variant::Mlp => (3 * n, n),
            Variant::Delan => (n, delan_outputs(n, self.gravity_head)),
            Variant::Lnn | Variant::LnnMlp => (2 * n, 1),
            _ => return None,
        };
        Some(MlpSpec {
            input_dim: input,
            output_dim: output,
            hidden_layers: self.hidden_layers,
            width: self.width,
            activation: self.activation,
        })
    }

    fn correction_spec(&self, variant: Variant, n: usize) -> Option<MlpSpec> {
        variant.has_correction().then(|| MlpSpec {
            input_dim: 2 * n,
            output_dim: n,
            hidden_layers: self.correction_hidden_layers.unwrap_or(self.hidden_layers),
            width: self.correction_width.unwrap_or(self.width),
            activation: self.activation,
        })
    }
}

/// Number of lower-triangular entries of an `n × n` factor.
pub fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

fn delan_outputs(n: usize, g: GravityHead) -> usize {
    tri_len(n)
        + match g {
            GravityHead::Direct => n,
            GravityHead::Potential => 1,
        }
}

/// Output row of factor entry `(i, j)`, `j ≤ i`: diagonal first, then the
/// strictly lower part row by row.
pub fn tri_row(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(j <= i && i < n);
    if i == j {
        i
    } else {
        n + i * (i - 1) / 2 + j
    }
}

/// A trained (or freshly initialized) inverse-dynamics predictor.
///
/// Networks work in normalized coordinates; the physics variants fold the
/// normalization into their assembly so that their internal quantities keep
/// physical meaning. Predictions are produced in normalized target units and
/// mapped back by [`IdModel::predict`].
#[derive(Serialize, Deserialize, Clone, Debug)]
pub struct IdModel {
    pub variant: Variant,
    pub dof: usize,
    pub target: TargetKind,
    pub config: ModelConfig,
    pub normalization: Normalization,
    /// Main network (if any) followed by the correction network (if any).
    pub nets: Vec<NetworkParams>,
    /// Identified viscous coefficients of the least-squares variant.
    #[serde(default)]
    pub viscous: Vec<f64>,
    #[serde(default)]
    pub robot_hash: Option<String>,
    #[serde(skip)]
    robot: Option<RobotModel>,
}

/// Forward record needed for a gradient.
pub struct Pass {
    pub pred: Vec<f64>,
    idx: Vec<usize>,
    main: Option<JetTrace>,
    corr: Option<JetTrace>,
}

const PREDICT_CHUNK: usize = 256;

impl IdModel {
    pub fn new(
        variant: Variant,
        config: &ModelConfig,
        normalization: &Normalization,
        target: TargetKind,
        robot: Option<&RobotModel>,
        seed: u64,
    ) -> Result<Self> {
        let n = normalization.dof();
        if variant.needs_robot() && robot.is_none() {
            return Err(Error::InvalidArgument(format!(
                "{variant} needs a robot model"
            )));
        }
        if let Some(r) = robot {
            if r.dof() != n {
                return Err(Error::dim("robot joints", n, r.dof()));
            }
        }
        if !(config.epsilon_pd > 0.0) {
            return Err(Error::InvalidArgument("epsilon_pd must be > 0".into()));
        }
        let scheme = config.init.unwrap_or_else(|| variant.default_init());
        let mut nets = Vec::new();
        if let Some(spec) = config.main_spec(variant, n) {
            let mut p = init_params(&spec, scheme, seed)?;
            if variant == Variant::Delan {
                let last = p.layers.len() - 1;
                let diag = inverse_softplus(1.0 - config.epsilon_pd);
                for i in 0..n {
                    *p.bias_mut(last, i) = diag;
                }
            }
            nets.push(p);
        }
        if let Some(spec) = config.correction_spec(variant, n) {
            let scheme = config.init.unwrap_or(InitScheme::UniformFan);
            nets.push(init_params(&spec, scheme, seed ^ 0x9e37_79b9_7f4a_7c15)?);
        }
        Ok(IdModel {
            variant,
            dof: n,
            target,
            config: config.clone(),
            normalization: normalization.clone(),
            nets,
            viscous: vec![0.0; if variant == Variant::RneaLq { n } else { 0 }],
            robot_hash: robot.map(RobotModel::config_hash),
            robot: robot.cloned(),
        })
    }

    /// Least-squares viscous identification on the training slice.
    pub fn fit_rnea_lq(robot: &RobotModel, data: &Dataset) -> Result<Self> {
        let norm = data.normalization()?;
        let mut m = Self::new(
            Variant::RneaLq,
            &ModelConfig::default(),
            norm,
            data.target,
            Some(robot),
            0,
        )?;
        m.viscous = rnea_lq_fit(robot, data.train(), data.target)?
            .friction
            .viscous;
        Ok(m)
    }

    pub fn robot(&self) -> Option<&RobotModel> {
        self.robot.as_ref()
    }

    /// Attaches the robot after deserialization, refusing a different one.
    pub fn attach_robot(&mut self, robot: &RobotModel) -> Result<()> {
        let h = robot.config_hash();
        if let Some(expected) = &self.robot_hash {
            if *expected != h {
                return Err(Error::RobotMismatch {
                    expected: expected.clone(),
                    got: h,
                });
            }
        }
        self.robot_hash = Some(h);
        self.robot = Some(robot.clone());
        Ok(())
    }

    pub fn scales(&self) -> Scales {
        Scales::new(&self.normalization)
    }

    pub fn param_len(&self) -> usize {
        self.nets.iter().map(NetworkParams::len).sum()
    }

    pub fn params(&self) -> Vec<f64> {
        self.nets
            .iter()
            .flat_map(|p| p.values.iter().copied())
            .collect()
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_len());
        let mut off = 0;
        for p in &mut self.nets {
            let len = p.len();
            p.values.copy_from_slice(&flat[off..off + len]);
            off += len;
        }
    }

    fn main_net(&self) -> &NetworkParams {
        &self.nets[0]
    }

    fn corr_net(&self) -> &NetworkParams {
        self.nets.last().expect("correction network")
    }

    fn main_range(&self) -> std::ops::Range<usize> {
        0..self.nets.first().map_or(0, NetworkParams::len)
    }

    fn corr_range(&self) -> std::ops::Range<usize> {
        let total = self.param_len();
        total - self.corr_net().len()..total
    }

    /// Prepared inputs for arbitrary states.
    pub fn features(&self, states: &[JointState]) -> Result<Features> {
        Features::from_states(
            states,
            &self.normalization,
            self.robot.as_ref(),
            self.target,
        )
    }

    /// Prepared inputs and targets for dataset samples.
    pub fn features_for(&self, samples: &[crate::data::TrajectorySample]) -> Result<Features> {
        Features::from_samples(
            samples,
            &self.normalization,
            self.robot.as_ref(),
            self.target,
        )
    }

    /// Normalized predictions for the selected rows of `f`.
    pub fn forward(&self, f: &Features, idx: &[usize]) -> Result<Pass> {
        let n = self.dof;
        if f.dof != n {
            return Err(Error::dim("feature joints", n, f.dof));
        }
        let sc = self.scales();
        let b = idx.len();
        let mut pred = vec![0.0; b * n];
        let mut main = None;
        let mut corr = None;
        if self.variant.needs_robot() {
            let base = f.baseline_phys.as_ref().ok_or_else(|| {
                Error::InvalidArgument(format!("{} needs rigid-body baselines", self.variant))
            })?;
            for (s, &k) in idx.iter().enumerate() {
                for i in 0..n {
                    let mut t = base[k * n + i];
                    if self.variant == Variant::RneaLq {
                        t -= self.viscous[i] * f.qd_phys[k * n + i];
                    }
                    pred[s * n + i] = sc.a_y[i] * t + sc.b_y[i];
                }
            }
        }
        match self.variant {
            Variant::Mlp => {
                let mut x = Jets::zeros(3 * n, b, 1);
                for (s, &k) in idx.iter().enumerate() {
                    let c = x.col_mut(s, 0);
                    c[..n].copy_from_slice(f.row(&f.q, k));
                    c[n..2 * n].copy_from_slice(f.row(&f.qd, k));
                    c[2 * n..].copy_from_slice(f.row(&f.qdd, k));
                }
                let t = JetTrace::forward(self.main_net(), &JetLayout::values_only(), x);
                add_values(&mut pred, t.output());
                main = Some(t);
            }
            Variant::Lnn | Variant::LnnMlp => {
                let t = self.lnn_forward(f, idx, &sc);
                let out = t.output();
                let layout = lnn_layout(n);
                let es = sc.energy_scale();
                for s in 0..b {
                    for i in 0..n {
                        let g = out.get(0, s, layout.tangent_col(i));
                        let p = out.get(0, s, layout.pair_col(i));
                        let tau = es * (sc.a_v[i] * p - sc.a_q[i] * g);
                        pred[s * n + i] += sc.a_y[i] * tau + sc.b_y[i];
                    }
                }
                main = Some(t);
            }
            Variant::Delan => {
                let t = self.delan_forward(f, idx);
                let out = t.output();
                let rows = out.rows;
                let mut o = vec![0.0; rows];
                let mut d = vec![vec![0.0; rows]; n];
                for (s, &k) in idx.iter().enumerate() {
                    o.copy_from_slice(out.col(s, 0));
                    for (kk, dk) in d.iter_mut().enumerate() {
                        dk.copy_from_slice(out.col(s, 1 + kk));
                    }
                    let y =
                        self.delan_head(&o, &d, f.row(&f.qd_phys, k), f.row(&f.qdd_phys, k), &sc);
                    pred[s * n..(s + 1) * n].copy_from_slice(&y);
                }
                main = Some(t);
            }
            Variant::RneaMlp | Variant::RneaLq => {}
        }
        if self.variant.has_correction() {
            let t = JetTrace::forward(
                self.corr_net(),
                &JetLayout::values_only(),
                state_input(f, idx),
            );
            add_values(&mut pred, t.output());
            corr = Some(t);
        }
        Ok(Pass {
            pred,
            idx: idx.to_vec(),
            main,
            corr,
        })
    }

    /// Accumulates `Σ d_pred · ∂pred/∂θ` into `grad` (flat, see [`Self::params`]).
    pub fn backward(&self, f: &Features, pass: &Pass, d_pred: &[f64], grad: &mut [f64]) {
        assert_eq!(grad.len(), self.param_len());
        assert_eq!(d_pred.len(), pass.pred.len());
        let n = self.dof;
        let b = pass.idx.len();
        let sc = self.scales();
        if let Some(t) = &pass.main {
            let out = t.output();
            let mut d_out = Jets::zeros(out.rows, out.samples, out.width);
            match self.variant {
                Variant::Mlp => d_out.data.copy_from_slice(d_pred),
                Variant::Lnn | Variant::LnnMlp => {
                    let layout = lnn_layout(n);
                    let es = sc.energy_scale();
                    for s in 0..b {
                        for i in 0..n {
                            let g = d_pred[s * n + i] * sc.a_y[i] * es;
                            d_out.set(0, s, layout.tangent_col(i), -g * sc.a_q[i]);
                            d_out.set(0, s, layout.pair_col(i), g * sc.a_v[i]);
                        }
                    }
                }
                Variant::Delan => self.delan_head_backward(f, pass, out, d_pred, &mut d_out, &sc),
                _ => unreachable!("variant without main network"),
            }
            let r = self.main_range();
            t.backward(self.main_net(), &d_out, &mut grad[r]);
        }
        if let Some(t) = &pass.corr {
            let out = t.output();
            let mut d_out = Jets::zeros(out.rows, out.samples, out.width);
            d_out.data.copy_from_slice(d_pred);
            let r = self.corr_range();
            t.backward(self.corr_net(), &d_out, &mut grad[r]);
        }
    }

    /// Mean squared error in normalized units over `idx`, and its gradient
    /// added into `grad` when given.
    pub fn mse_and_grad(
        &self,
        f: &Features,
        idx: &[usize],
        grad: Option<&mut [f64]>,
    ) -> Result<f64> {
        if idx.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let y =
            f.y.as_ref()
                .ok_or_else(|| Error::InvalidArgument("features carry no targets".into()))?;
        let n = self.dof;
        let pass = self.forward(f, idx)?;
        let denom = (idx.len() * n) as f64;
        let mut loss = 0.0;
        let mut d = vec![0.0; pass.pred.len()];
        for (s, &k) in idx.iter().enumerate() {
            for i in 0..n {
                let r = pass.pred[s * n + i] - y[k * n + i];
                loss += r * r;
                d[s * n + i] = 2.0 * r / denom;
            }
        }
        if let Some(g) = grad {
            if self.variant.is_trainable() {
                self.backward(f, &pass, &d, g);
            }
        }
        Ok(loss / denom)
    }

    /// Normalized predictions for every row of `f`.
    pub fn predict_features(&self, f: &Features) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(f.len * self.dof);
        let all: Vec<usize> = (0..f.len).collect();
        for chunk in all.chunks(PREDICT_CHUNK) {
            out.extend(self.forward(f, chunk)?.pred);
        }
        Ok(out)
    }

    /// Physical-unit prediction for one state.
    pub fn predict(&self, state: &JointState) -> Result<Vec<f64>> {
        let yn = self.predict_normalized(state)?;
        Ok(self.normalization.y.denormalize(&yn))
    }

    pub fn predict_normalized(&self, state: &JointState) -> Result<Vec<f64>> {
        let f = self.features(std::slice::from_ref(state))?;
        Ok(self.forward(&f, &[0])?.pred)
    }

    /// Normalized prediction assembled on the general autodiff engine
    /// (nested duals over the scalar network) rather than batched jets.
    pub fn predict_reference(&self, state: &JointState) -> Result<Vec<f64>> {
        state.validate(self.dof)?;
        let sc = self.scales();
        let n = self.dof;
        let mut tau = match self.variant {
            Variant::Lnn | Variant::LnnMlp => lnn_torque_at(
                &self.lnn_fn(&sc),
                &self.main_net().values,
                &state.q,
                &state.qd,
                &state.qdd,
            ),
            Variant::Delan => delan_torque_at(
                &self.delan_fn(&sc),
                &self.main_net().values,
                &state.q,
                &state.qd,
                &state.qdd,
            ),
            _ => return self.predict_normalized(state),
        };
        for (i, t) in tau.iter_mut().enumerate() {
            *t = sc.a_y[i] * *t + sc.b_y[i];
        }
        if self.variant.has_correction() {
            let x: Vec<f64> = self
                .normalization
                .q
                .normalize(&state.q)
                .into_iter()
                .chain(self.normalization.qd.normalize(&state.qd))
                .collect();
            let h = mlp_eval(&self.corr_net().layers, &self.corr_net().values, &x);
            for i in 0..n {
                tau[i] += h[i];
            }
        }
        Ok(tau)
    }

    /// Network-parameterized Lagrangian in physical coordinates.
    pub fn lnn_fn(&self, sc: &Scales) -> LnnLagrangian<'_> {
        LnnLagrangian {
            layers: &self.main_net().layers,
            scales: sc.clone(),
        }
    }

    /// Network-parameterized inertia factor and gravity in physical
    /// coordinates.
    pub fn delan_fn(&self, sc: &Scales) -> DelanInertia<'_> {
        DelanInertia {
            layers: &self.main_net().layers,
            scales: sc.clone(),
            epsilon_pd: self.config.epsilon_pd,
            gravity: self.config.gravity_head,
            n: self.dof,
        }
    }

    /// `M(q)` of a DeLaN model in normalized-factor form `L_netᵀ L_net`.
    pub fn delan_network_inertia(&self, q: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        if self.variant != Variant::Delan {
            return Err(Error::InvalidArgument("not a DeLaN model".into()));
        }
        if q.len() != self.dof {
            return Err(Error::dim("q", self.dof, q.len()));
        }
        let n = self.dof;
        let qn = self.normalization.q.normalize(q);
        let o = mlp_eval(&self.main_net().layers, &self.main_net().values, &qn);
        let l = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            if j > i {
                0.0
            } else if i == j {
                o[i].softplus() + self.config.epsilon_pd
            } else {
                o[tri_row(n, i, j)]
            }
        });
        Ok(l.transpose() * l)
    }

    fn lnn_forward(&self, f: &Features, idx: &[usize], sc: &Scales) -> JetTrace {
        let n = self.dof;
        let layout = lnn_layout(n);
        let mut x = Jets::zeros(2 * n, idx.len(), layout.width());
        for (s, &k) in idx.iter().enumerate() {
            let c = x.col_mut(s, 0);
            c[..n].copy_from_slice(f.row(&f.q, k));
            c[n..].copy_from_slice(f.row(&f.qd, k));
            for j in 0..2 * n {
                x.set(j, s, layout.tangent_col(j), 1.0);
            }
            let d = x.col_mut(s, layout.tangent_col(2 * n));
            for i in 0..n {
                d[i] = sc.a_q[i] * f.qd_phys[k * n + i];
                d[n + i] = sc.a_v[i] * f.qdd_phys[k * n + i];
            }
        }
        JetTrace::forward(self.main_net(), &layout, x)
    }

    fn delan_forward(&self, f: &Features, idx: &[usize]) -> JetTrace {
        let n = self.dof;
        let layout = JetLayout::first_order(n);
        let mut x = Jets::zeros(n, idx.len(), layout.width());
        for (s, &k) in idx.iter().enumerate() {
            x.col_mut(s, 0).copy_from_slice(f.row(&f.q, k));
            for j in 0..n {
                x.set(j, s, layout.tangent_col(j), 1.0);
            }
        }
        JetTrace::forward(self.main_net(), &layout, x)
    }

    /// Normalized DeLaN prediction from network outputs `o` and their
    /// derivatives `d[k] = ∂o/∂q_n,k`.
    fn delan_head<T: Real>(
        &self,
        o: &[T],
        d: &[Vec<T>],
        qd: &[f64],
        qdd: &[f64],
        sc: &Scales,
    ) -> Vec<T> {
        let n = self.dof;
        let eps = self.config.epsilon_pd;
        let dsc: Vec<f64> = (0..n).map(|j| sc.inertia_scale(j)).collect();
        let u: Vec<f64> = (0..n).map(|j| dsc[j] * qd[j]).collect();
        let w: Vec<f64> = (0..n).map(|j| dsc[j] * qdd[j]).collect();
        let zero = T::zero();
        let mut l = vec![vec![zero; n]; n];
        let mut dl = vec![vec![vec![zero; n]; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let r = tri_row(n, i, j);
                if i == j {
                    l[i][i] = o[r].softplus() + eps;
                    let s = o[r].sigmoid();
                    for k in 0..n {
                        dl[k][i][i] = s * d[k][r];
                    }
                } else {
                    l[i][j] = o[r];
                    for k in 0..n {
                        dl[k][i][j] = d[k][r];
                    }
                }
            }
        }
        let mut ldot = vec![vec![zero; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = zero;
                for k in 0..n {
                    acc = acc + dl[k][i][j] * (qd[k] * sc.a_q[k]);
                }
                ldot[i][j] = acc;
            }
        }
        let lv = |m: &Vec<Vec<T>>, v: &[f64]| -> Vec<T> {
            (0..n)
                .map(|i| (0..=i).fold(zero, |acc, j| acc + m[i][j] * v[j]))
                .collect()
        };
        let ltv = |m: &Vec<Vec<T>>, v: &[T]| -> Vec<T> {
            (0..n)
                .map(|j| (j..n).fold(zero, |acc, i| acc + m[i][j] * v[i]))
                .collect()
        };
        let lu = lv(&l, &u);
        let lw = lv(&l, &w);
        let ldu = lv(&ldot, &u);
        let a = ltv(&l, &lw);
        let bb = ltv(&ldot, &lu);
        let c = ltv(&l, &ldu);
        let nl = tri_len(n);
        let es = sc.energy_scale();
        (0..n)
            .map(|i| {
                let dlu = lv(&dl[i], &u);
                let half = dlu.iter().zip(&lu).fold(zero, |acc, (&x, &y)| acc + x * y);
                let mut tau = (a[i] + bb[i] + c[i]) * dsc[i] - half * sc.a_q[i];
                tau = match self.config.gravity_head {
                    GravityHead::Direct => tau - o[nl + i] / sc.a_y_safe(i),
                    GravityHead::Potential => tau + d[i][nl] * (es * sc.a_q[i]),
                };
                tau * sc.a_y[i] + sc.b_y[i]
            })
            .collect()
    }

    fn delan_head_backward(
        &self,
        f: &Features,
        pass: &Pass,
        out: &Jets,
        d_pred: &[f64],
        d_out: &mut Jets,
        sc: &Scales,
    ) {
        let n = self.dof;
        let rows = out.rows;
        let mut tape = Tape::with_capacity(4096);
        for (s, &k) in pass.idx.iter().enumerate() {
            {
                let o = tape.vars(out.col(s, 0));
                let d: Vec<Vec<_>> = (0..n).map(|kk| tape.vars(out.col(s, 1 + kk))).collect();
                let y = self.delan_head(&o, &d, f.row(&f.qd_phys, k), f.row(&f.qdd_phys, k), sc);
                let obj = y
                    .iter()
                    .enumerate()
                    .fold(crate::autodiff::Var::constant(0.0), |acc, (i, &v)| {
                        acc + v * d_pred[s * n + i]
                    });
                let adj = tape.adjoints(obj);
                for r in 0..rows {
                    d_out.set(r, s, 0, adj.wrt(o[r]));
                    for kk in 0..n {
                        d_out.set(r, s, 1 + kk, adj.wrt(d[kk][r]));
                    }
                }
            }
            tape.clear();
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    /// Reads a checkpoint and binds it to `robot`, which must match the
    /// robot the model was trained with.
    pub fn load(path: &Path, robot: Option<&RobotModel>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut m: IdModel =
            serde_json::from_str(&text).map_err(|e| Error::config(path, e.to_string()))?;
        m.validate()?;
        match robot {
            Some(r) => m.attach_robot(r)?,
            None if m.variant.needs_robot() => {
                return Err(Error::InvalidArgument(format!(
                    "{} checkpoint needs its robot model",
                    m.variant
                )))
            }
            None => {}
        }
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let n = self.dof;
        let expected: Vec<MlpSpec> = self
            .config
            .main_spec(self.variant, n)
            .into_iter()
            .chain(self.config.correction_spec(self.variant, n))
            .collect();
        if expected.len() != self.nets.len() {
            return Err(Error::InvalidModel(format!(
                "{} expects {} networks, checkpoint has {}",
                self.variant,
                expected.len(),
                self.nets.len()
            )));
        }
        for (spec, p) in expected.iter().zip(&self.nets) {
            if spec.layers() != p.layers || p.values.len() != spec.param_count() {
                return Err(Error::InvalidModel(
                    "network shape does not match its config".into(),
                ));
            }
        }
        if self.variant == Variant::RneaLq && self.viscous.len() != n {
            return Err(Error::dim("viscous coefficients", n, self.viscous.len()));
        }
        Ok(())
    }

    /// `baseline` of the attached robot for a state, physical units.
    pub fn rigid_body_baseline(&self, state: &JointState) -> Result<Vec<f64>> {
        let r = self
            .robot
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("no robot attached".into()))?;
        baseline(r, state, self.target)
    }
}

fn inverse_softplus(y: f64) -> f64 {
    y + (-(-y).exp_m1()).ln()
}

fn lnn_layout(n: usize) -> JetLayout {
    JetLayout {
        tangents: 2 * n + 1,
        pairs: (0..n).map(|i| (n + i, 2 * n)).collect(),
    }
}

fn state_input(f: &Features, idx: &[usize]) -> Jets {
    let n = f.dof;
    let mut x = Jets::zeros(2 * n, idx.len(), 1);
    for (s, &k) in idx.iter().enumerate() {
        let c = x.col_mut(s, 0);
        c[..n].copy_from_slice(f.row(&f.q, k));
        c[n..].copy_from_slice(f.row(&f.qd, k));
    }
    x
}

fn add_values(pred: &mut [f64], out: &Jets) {
    debug_assert_eq!(out.width, 1);
    for (p, v) in pred.iter_mut().zip(&out.data) {
        *p += v;
    }
}

/// `L(q, q̇) = s · h(a_q q + b_q, a_v q̇ + b_v)` over physical inputs.
pub struct LnnLagrangian<'a> {
    layers: &'a [super::mlp::LayerShape],
    scales: Scales,
}

impl ParamFn for LnnLagrangian<'_> {
    fn eval<T: Real>(&self, params: &[T], x: &[T]) -> T {
        let n = x.len() / 2;
        let sc = &self.scales;
        let xn: Vec<T> = (0..2 * n)
            .map(|k| {
                if k < n {
                    x[k] * sc.a_q[k] + sc.b_q[k]
                } else {
                    x[k] * sc.a_v[k - n] + sc.b_v[k - n]
                }
            })
            .collect();
        mlp_eval(self.layers, params, &xn)[0] * sc.energy_scale()
    }
}

/// Physical-coordinate DeLaN components: factor `L_net(q_n) · D` and `G`.
pub struct DelanInertia<'a> {
    layers: &'a [super::mlp::LayerShape],
    scales: Scales,
    epsilon_pd: f64,
    gravity: GravityHead,
    n: usize,
}

impl InertiaFn for DelanInertia<'_> {
    fn dof(&self) -> usize {
        self.n
    }

    fn factor<T: Real>(&self, params: &[T], q: &[T]) -> (Vec<Vec<T>>, Vec<T>) {
        let n = self.n;
        let sc = &self.scales;
        let qn: Vec<T> = (0..n).map(|k| q[k] * sc.a_q[k] + sc.b_q[k]).collect();
        let o = mlp_eval(self.layers, params, &qn);
        let l: Vec<Vec<T>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let v = if j > i {
                            T::zero()
                        } else if i == j {
                            o[i].softplus() + self.epsilon_pd
                        } else {
                            o[tri_row(n, i, j)]
                        };
                        v * sc.inertia_scale(j)
                    })
                    .collect()
            })
            .collect();
        let nl = tri_len(n);
        let g = match self.gravity {
            GravityHead::Direct => (0..n).map(|i| o[nl + i] / sc.a_y_safe(i)).collect(),
            GravityHead::Potential => {
                let head = MlpOutput {
                    layers: self.layers,
                    output: nl,
                };
                let dv = gradient_at(&head, params, &qn);
                let es = sc.energy_scale();
                (0..n).map(|i| -(dv[i] * (es * sc.a_q[i]))).collect()
            }
        };
        (l, g)
    }
}
