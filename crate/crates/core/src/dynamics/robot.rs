use std::path::Path;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

const MAX_DOF: usize = 12;
const UNIT_TOL: f64 = 1e-12;
/// Slack on inertia eigenvalue and triangle checks, relative to the largest
/// principal moment.
const INERTIA_TOL: f64 = 1e-9;

/// Mass properties of one body, expressed in the body frame.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct SpatialInertia {
    pub mass: f64,
    pub center_of_mass: [f64; 3],
    /// About the body-frame origin, row-major.
    pub rotational_inertia: [[f64; 3]; 3],
}

impl SpatialInertia {
    /// A body with the given mass properties about its center of mass.
    pub fn from_com_inertia(mass: f64, com: [f64; 3], inertia_at_com: [[f64; 3]; 3]) -> Self {
        let c = Vector3::from(com);
        let shifted = mat3(&inertia_at_com) + point_mass_tensor(mass, &c);
        SpatialInertia {
            mass,
            center_of_mass: com,
            rotational_inertia: to_rows(&shifted),
        }
    }

    pub fn point_mass(mass: f64, com: [f64; 3]) -> Self {
        Self::from_com_inertia(mass, com, [[0.0; 3]; 3])
    }

    pub fn com(&self) -> Vector3<f64> {
        Vector3::from(self.center_of_mass)
    }

    pub fn inertia_at_origin(&self) -> Matrix3<f64> {
        mat3(&self.rotational_inertia)
    }

    pub fn inertia_at_com(&self) -> Matrix3<f64> {
        self.inertia_at_origin() - point_mass_tensor(self.mass, &self.com())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(Error::InvalidModel(format!(
                "mass must be > 0, got {}",
                self.mass
            )));
        }
        let i_o = self.inertia_at_origin();
        if i_o.iter().any(|v| !v.is_finite()) || self.center_of_mass.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidModel("non-finite inertial parameter".into()));
        }
        let scale = i_o.abs().max().max(f64::MIN_POSITIVE);
        if (i_o - i_o.transpose()).abs().max() > INERTIA_TOL * scale {
            return Err(Error::InvalidModel(
                "rotational inertia is not symmetric".into(),
            ));
        }
        if SymmetricEigen::new(i_o).eigenvalues.min() < -INERTIA_TOL * scale {
            return Err(Error::InvalidModel(
                "rotational inertia has a negative eigenvalue".into(),
            ));
        }
        let p = SymmetricEigen::new(self.inertia_at_com()).eigenvalues;
        let tol = INERTIA_TOL * scale;
        if p.min() < -tol {
            return Err(Error::InvalidModel(
                "inertia about the center of mass has a negative eigenvalue".into(),
            ));
        }
        for k in 0..3 {
            if p[k] + p[(k + 1) % 3] < p[(k + 2) % 3] - tol {
                return Err(Error::InvalidModel(
                    "principal moments violate the triangle inequality".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum JointType {
    #[default]
    Revolute,
}

/// Placement of a joint relative to its parent body.
///
/// The child body frame sits at `translation` in the parent frame with
/// orientation `Rot(axis, q) · rotation`; the axis is given in parent
/// coordinates and passes through the child frame origin.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct JointSpec {
    pub axis: [f64; 3],
    #[serde(default = "identity_rows")]
    pub rotation: [[f64; 3]; 3],
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default)]
    pub joint_type: JointType,
}

fn identity_rows() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

impl JointSpec {
    pub fn revolute(axis: [f64; 3], translation: [f64; 3]) -> Self {
        JointSpec {
            axis,
            rotation: identity_rows(),
            translation,
            joint_type: JointType::Revolute,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = Vector3::from(self.axis);
        if !((a.norm() - 1.0).abs() <= UNIT_TOL) {
            return Err(Error::InvalidModel(format!(
                "joint axis must be a unit vector, |axis| = {}",
                a.norm()
            )));
        }
        let r = mat3(&self.rotation);
        if (r.transpose() * r - Matrix3::identity()).abs().max() > UNIT_TOL || r.determinant() < 0.0
        {
            return Err(Error::InvalidModel(
                "joint rotation is not orthonormal".into(),
            ));
        }
        if self.translation.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite joint translation".into()));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct MotorSpec {
    pub gear_ratio: f64,
    /// N·m/A
    pub torque_constant: f64,
    /// Rotor inertia about its axis, kg·m².
    pub motor_inertia: f64,
}

impl MotorSpec {
    /// Direct drive: ψ = 1, K = 1, no rotor inertia.
    pub fn direct() -> Self {
        MotorSpec {
            gear_ratio: 1.0,
            torque_constant: 1.0,
            motor_inertia: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.gear_ratio > 0.0
            && self.torque_constant > 0.0
            && self.motor_inertia >= 0.0
            && self.gear_ratio.is_finite()
            && self.torque_constant.is_finite()
            && self.motor_inertia.is_finite();
        if !ok {
            return Err(Error::InvalidModel(format!(
                "motor needs gear_ratio > 0, torque_constant > 0, motor_inertia >= 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

pub const DEFAULT_COULOMB_SMOOTHING: f64 = 0.01;

fn default_smoothing() -> f64 {
    DEFAULT_COULOMB_SMOOTHING
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct FrictionCoefficients {
    /// N·m·s/rad per joint.
    pub viscous: Vec<f64>,
    /// N·m per joint.
    pub coulomb: Vec<f64>,
    /// rad/s
    #[serde(default = "default_smoothing")]
    pub coulomb_smoothing_velocity: f64,
}

impl FrictionCoefficients {
    pub fn zero(n: usize) -> Self {
        FrictionCoefficients {
            viscous: vec![0.0; n],
            coulomb: vec![0.0; n],
            coulomb_smoothing_velocity: DEFAULT_COULOMB_SMOOTHING,
        }
    }

    pub fn viscous(viscous: Vec<f64>) -> Self {
        let n = viscous.len();
        FrictionCoefficients {
            viscous,
            coulomb: vec![0.0; n],
            coulomb_smoothing_velocity: DEFAULT_COULOMB_SMOOTHING,
        }
    }

    pub fn dof(&self) -> usize {
        self.viscous.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.viscous.len() != n {
            return Err(Error::dim("viscous friction", n, self.viscous.len()));
        }
        if self.coulomb.len() != n {
            return Err(Error::dim("coulomb friction", n, self.coulomb.len()));
        }
        let all = self.viscous.iter().chain(&self.coulomb);
        if all.clone().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidModel(
                "friction coefficients must be >= 0".into(),
            ));
        }
        if !(self.coulomb_smoothing_velocity > 0.0 && self.coulomb_smoothing_velocity.is_finite()) {
            return Err(Error::InvalidModel(
                "coulomb_smoothing_velocity must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// `τ_D = −θ_D q̇ − coulomb · tanh(q̇ / v₀)` per joint.
    pub fn torque(&self, qd: &[f64]) -> Vec<f64> {
        qd.iter()
            .enumerate()
            .map(|(i, &v)| {
                -self.viscous[i] * v
                    - self.coulomb[i] * (v / self.coulomb_smoothing_velocity).tanh()
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Link {
    pub joint: JointSpec,
    pub inertia: SpatialInertia,
    pub motor: MotorSpec,
}

fn default_gravity() -> [f64; 3] {
    [0.0, 0.0, -9.81]
}

/// A serial chain of revolute joints with motor-side constants.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct RobotModel {
    pub links: Vec<Link>,
    #[serde(default = "default_gravity")]
    pub gravity: [f64; 3],
    pub ground_truth_friction: FrictionCoefficients,
}

impl RobotModel {
    pub fn new(
        links: Vec<Link>,
        gravity: [f64; 3],
        friction: FrictionCoefficients,
    ) -> Result<Self> {
        let model = RobotModel {
            links,
            gravity,
            ground_truth_friction: friction,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn dof(&self) -> usize {
        self.links.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dof();
        if n == 0 || n > MAX_DOF {
            return Err(Error::InvalidModel(format!(
                "degrees of freedom must be in 1..={MAX_DOF}, got {n}"
            )));
        }
        for (i, link) in self.links.iter().enumerate() {
            let ctx = |e: Error| Error::InvalidModel(format!("link {}: {e}", i + 1));
            link.joint.validate().map_err(ctx)?;
            link.inertia.validate().map_err(ctx)?;
            link.motor.validate().map_err(ctx)?;
        }
        if self.gravity.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidModel("non-finite gravity".into()));
        }
        self.ground_truth_friction.validate(n)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let model: RobotModel = serde_json::from_str(s)?;
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path, format!("cannot read robot config: {e}")))?;
        let model: RobotModel =
            serde_json::from_str(&text).map_err(|e| Error::config(path, e.to_string()))?;
        model
            .validate()
            .map_err(|e| Error::config(path, e.to_string()))?;
        Ok(model)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("robot model serializes")
    }

    /// Short digest of the canonical JSON encoding; checkpoints carry it so
    /// a model is never evaluated against a different robot.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("robot model serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn gear_ratios(&self) -> Vec<f64> {
        self.links.iter().map(|l| l.motor.gear_ratio).collect()
    }

    pub fn with_friction(&self, friction: FrictionCoefficients) -> Result<Self> {
        let mut m = self.clone();
        m.ground_truth_friction = friction;
        m.validate()?;
        Ok(m)
    }

    /// Direct-drive copy: ψ = 1, K = 1, no rotor inertia.
    pub fn direct_drive(&self) -> Self {
        let mut m = self.clone();
        for l in &mut m.links {
            l.motor = MotorSpec::direct();
        }
        m
    }

    /// Same masses and centers of mass with every body collapsed to a point.
    pub fn point_mass_equivalent(&self) -> Self {
        let mut m = self.clone();
        for l in &mut m.links {
            l.inertia = SpatialInertia::point_mass(l.inertia.mass, l.inertia.center_of_mass);
        }
        m
    }

    /// Single point-mass pendulum swinging about the world y axis; `q = 0`
    /// hangs straight down.
    pub fn pendulum(mass: f64, length: f64) -> Result<Self> {
        Self::new(
            vec![Link {
                joint: JointSpec::revolute([0.0, 1.0, 0.0], [0.0; 3]),
                inertia: SpatialInertia::point_mass(mass, [0.0, 0.0, -length]),
                motor: MotorSpec::direct(),
            }],
            default_gravity(),
            FrictionCoefficients::zero(1),
        )
    }

    /// Planar chain of point masses at the link tips, all axes along y,
    /// gravity along −z; `q = 0` hangs straight down.
    pub fn planar_arm(masses: &[f64], lengths: &[f64]) -> Result<Self> {
        if masses.len() != lengths.len() {
            return Err(Error::dim(
                "planar arm lengths",
                masses.len(),
                lengths.len(),
            ));
        }
        let links = masses
            .iter()
            .zip(lengths)
            .enumerate()
            .map(|(i, (&m, &l))| {
                let offset = if i == 0 { 0.0 } else { -lengths[i - 1] };
                Link {
                    joint: JointSpec::revolute([0.0, 1.0, 0.0], [0.0, 0.0, offset]),
                    inertia: SpatialInertia::point_mass(m, [0.0, 0.0, -l]),
                    motor: MotorSpec::direct(),
                }
            })
            .collect();
        Self::new(
            links,
            default_gravity(),
            FrictionCoefficients::zero(masses.len()),
        )
    }

    /// Desk-scale 3-DOF arm used by the shipped experiments.
    pub fn surrogate() -> Self {
        const RADIUS: f64 = 0.05;
        let rod = |m: f64, len: f64, along_x: bool| {
            let across = m * (3.0 * RADIUS * RADIUS + len * len) / 12.0;
            let along = 0.5 * m * RADIUS * RADIUS;
            if along_x {
                SpatialInertia::from_com_inertia(
                    m,
                    [len / 2.0, 0.0, 0.0],
                    [[along, 0.0, 0.0], [0.0, across, 0.0], [0.0, 0.0, across]],
                )
            } else {
                SpatialInertia::from_com_inertia(
                    m,
                    [0.0, 0.0, len / 2.0],
                    [[across, 0.0, 0.0], [0.0, across, 0.0], [0.0, 0.0, along]],
                )
            }
        };
        let motor = |psi: f64, k: f64, im: f64| MotorSpec {
            gear_ratio: psi,
            torque_constant: k,
            motor_inertia: im,
        };
        let links = vec![
            Link {
                joint: JointSpec::revolute([0.0, 0.0, 1.0], [0.0; 3]),
                inertia: rod(10.0, 0.4, false),
                motor: motor(100.0, 0.1, 1e-4),
            },
            Link {
                joint: JointSpec::revolute([0.0, 1.0, 0.0], [0.0, 0.0, 0.4]),
                inertia: rod(5.0, 0.3, true),
                motor: motor(100.0, 0.1, 1e-4),
            },
            Link {
                joint: JointSpec::revolute([0.0, 1.0, 0.0], [0.3, 0.0, 0.0]),
                inertia: rod(2.0, 0.2, true),
                motor: motor(50.0, 0.05, 5e-5),
            },
        ];
        let friction = FrictionCoefficients {
            viscous: vec![8.0, 5.0, 2.0],
            coulomb: vec![3.0, 2.0, 1.0],
            coulomb_smoothing_velocity: DEFAULT_COULOMB_SMOOTHING,
        };
        Self::new(links, default_gravity(), friction).expect("surrogate robot is valid")
    }
}

/// Positions, velocities and accelerations of all joints.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct JointState {
    pub q: Vec<f64>,
    pub qd: Vec<f64>,
    pub qdd: Vec<f64>,
}

impl JointState {
    pub fn new(q: Vec<f64>, qd: Vec<f64>, qdd: Vec<f64>) -> Self {
        JointState { q, qd, qdd }
    }

    pub fn at_rest(q: Vec<f64>) -> Self {
        let n = q.len();
        JointState {
            q,
            qd: vec![0.0; n],
            qdd: vec![0.0; n],
        }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for (what, v) in [("q", &self.q), ("qd", &self.qd), ("qdd", &self.qdd)] {
            if v.len() != n {
                return Err(Error::dim(what, n, v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "non-finite entry in {what}"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn mat3(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// `m (|c|² I − c cᵀ)`, the inertia of a point mass at `c` about the origin.
pub(crate) fn point_mass_tensor(m: f64, c: &Vector3<f64>) -> Matrix3<f64> {
    (Matrix3::identity() * c.norm_squared() - c * c.transpose()) * m
}
