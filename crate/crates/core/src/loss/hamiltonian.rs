//! Floquet Hamiltonian of two spin-1/2 atoms in the rf field with magnetic
//! dipole-dipole coupling, and the asymptotic dressed spin-photon states.
//!
//! Geometry: the quantization axis (for both spin and partial waves) is the
//! static field, `b_perp` in [`FieldConfig`]; the rf is polarized along the
//! perpendicular axis. In the Floquet picture the drive couples photon
//! indices `n` and `n +- 1` through `(hbar Omega / 2) S_x` of the total spin.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::angular::{c_tensor_element, clebsch_gordan_doubled};
use super::channels::{Channel, ChannelBasis};
use crate::constants::{CHROMIUM_52_MASS_AMU, CODATA};
use crate::error::{positive, Error};
use crate::field::FieldConfig;
use crate::Result;

/// Parameters of the atom pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoAtomSystem {
    /// Landé factor of each spin-1/2 atom.
    pub g_j: f64,
    /// Reduced mass (kg).
    pub reduced_mass: f64,
    /// Multiplier on the dipolar prefactor `(mu0/4pi)(gJ mu_B)^2`; 0 switches the coupling off.
    pub dipolar_scale: f64,
}

impl TwoAtomSystem {
    pub fn new(g_j: f64, reduced_mass: f64) -> Result<Self> {
        let s = Self {
            g_j,
            reduced_mass,
            dipolar_scale: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    /// Spin-1/2 surrogate with `gJ = 2` and the reduced mass of a 52Cr pair.
    pub fn chromium_pair() -> Self {
        Self {
            g_j: 2.0,
            reduced_mass: 0.5 * CHROMIUM_52_MASS_AMU * CODATA.amu,
            dipolar_scale: 1.0,
        }
    }

    pub fn with_dipolar_scale(&self, dipolar_scale: f64) -> Self {
        Self {
            dipolar_scale,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        crate::error::finite("g_j", self.g_j)?;
        positive("reduced_mass", self.reduced_mass)?;
        crate::error::non_negative("dipolar_scale", self.dipolar_scale)?;
        Ok(())
    }

    /// Zeeman angular frequency of one unit of `m_S` in the static field (signed).
    pub fn larmor(&self, field: &FieldConfig) -> f64 {
        self.g_j * CODATA.mu_b * field.b_perp / CODATA.hbar
    }

    /// Scaled `V_d(R)` (J).
    pub fn dipolar_strength(&self, r: f64) -> f64 {
        self.dipolar_scale * dipolar_energy(r, self.g_j)
    }

    /// `l(l+1) hbar^2 / (2 mu R^2)` (J).
    pub fn centrifugal(&self, l: i64, r: f64) -> f64 {
        (l * (l + 1)) as f64 * CODATA.hbar.powi(2) / (2.0 * self.reduced_mass * r * r)
    }
}

/// `V_d(R) = (mu0/4pi)(gJ mu_B)^2 / R^3` (J).
pub fn dipolar_energy(r: f64, g_j: f64) -> f64 {
    CODATA.mu0_over_4pi * (g_j * CODATA.mu_b).powi(2) / r.powi(3)
}

/// `<1 m'| [s1 x s2]^(2)_q |1 m>` for two spin-1/2, indexed `[q + 2][m' + 1][m + 1]`.
fn spin_tensor() -> &'static [[[f64; 3]; 3]; 5] {
    static TABLE: OnceLock<[[[f64; 3]; 3]; 5]> = OnceLock::new();
    TABLE.get_or_init(|| {
        // single spin, basis (up, down); spherical components s_{+1}, s_0, s_{-1}
        let r2 = std::f64::consts::SQRT_2;
        let sq = |q: i64| -> [[f64; 2]; 2] {
            match q {
                1 => [[0.0, -1.0 / r2], [0.0, 0.0]],
                0 => [[0.5, 0.0], [0.0, -0.5]],
                _ => [[0.0, 0.0], [1.0 / r2, 0.0]],
            }
        };
        // product index 2a + b
        let triplet = |m: i64| -> [f64; 4] {
            match m {
                1 => [1.0, 0.0, 0.0, 0.0],
                0 => [0.0, 1.0 / r2, 1.0 / r2, 0.0],
                _ => [0.0, 0.0, 0.0, 1.0],
            }
        };
        let mut out = [[[0.0; 3]; 3]; 5];
        for q in -2..=2i64 {
            let mut t = [[0.0; 4]; 4];
            for q1 in -1..=1i64 {
                let q2 = q - q1;
                if q2.abs() > 1 {
                    continue;
                }
                let cg = clebsch_gordan_doubled(2, 2 * q1, 2, 2 * q2, 4, 2 * q);
                let (a, b) = (sq(q1), sq(q2));
                for i in 0..4 {
                    for j in 0..4 {
                        t[i][j] += cg * a[i / 2][j / 2] * b[i % 2][j % 2];
                    }
                }
            }
            for mp in -1..=1i64 {
                for m in -1..=1i64 {
                    let (u, v) = (triplet(mp), triplet(m));
                    let mut acc = 0.0;
                    for i in 0..4 {
                        for j in 0..4 {
                            acc += u[i] * t[i][j] * v[j];
                        }
                    }
                    out[(q + 2) as usize][(mp + 1) as usize][(m + 1) as usize] = acc;
                }
            }
        }
        out
    })
}

/// `<a| S1.S2 - 3 (S1.r)(S2.r) |b>` over spin and orbital angles, ignoring `n`.
pub fn angular_factor(a: &Channel, b: &Channel) -> f64 {
    if a.s != 1 || b.s != 1 || a.projection() != b.projection() {
        return 0.0;
    }
    let q = a.m_s - b.m_s;
    if q.abs() > 2 {
        return 0.0;
    }
    let spin = spin_tensor()[(q + 2) as usize][(a.m_s + 1) as usize][(b.m_s + 1) as usize];
    let orbital = c_tensor_element(a.l, a.m_l, 2, -q, b.l, b.m_l);
    let phase = if q.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    -6f64.sqrt() * phase * orbital * spin
}

/// Dipole-dipole matrix element between two channels (J); zero unless the
/// photon indices agree.
pub fn dipole_dipole_element(a: &Channel, b: &Channel, r: f64, g_j: f64) -> Result<f64> {
    positive("R", r)?;
    a.validate()?;
    b.validate()?;
    if a.n != b.n {
        return Ok(0.0);
    }
    Ok(dipolar_energy(r, g_j) * angular_factor(a, b))
}

/// `<m'|S_x|m>` for total spin `s`.
fn sx_element(s: i64, mp: i64, m: i64) -> f64 {
    if (mp - m).abs() != 1 {
        return 0.0;
    }
    let (s, mm) = (s as f64, m as f64);
    let mpf = mp as f64;
    0.5 * (s * (s + 1.0) - mm * mpf).sqrt()
}

/// `H(R) = H_inf + V_d(R) A + hbar^2/(2 mu R^2) L` split into its R-independent parts.
#[derive(Clone, Debug)]
pub struct ChannelHamiltonian {
    basis: ChannelBasis,
    system: TwoAtomSystem,
    rf_omega: f64,
    asymptotic: DMatrix<f64>,
    angular: DMatrix<f64>,
    l_factor: Vec<f64>,
}

impl ChannelHamiltonian {
    pub fn new(field: &FieldConfig, system: &TwoAtomSystem, basis: &ChannelBasis) -> Result<Self> {
        field.validate()?;
        system.validate()?;
        if field.b_par != 0.0 {
            return Err(Error::invalid(
                "b_par",
                "the two-atom model needs the rf polarized perpendicular to the static field",
            ));
        }
        basis.check_closed()?;
        let hbar = CODATA.hbar;
        let wl = system.larmor(field);
        let n = basis.len();
        let mut asymptotic = DMatrix::zeros(n, n);
        let mut angular = DMatrix::zeros(n, n);
        let chans = basis.channels();
        for (i, a) in chans.iter().enumerate() {
            asymptotic[(i, i)] = hbar * (wl * a.m_s as f64 + field.rf_omega * a.n as f64);
            for (j, b) in chans.iter().enumerate() {
                if a.l == b.l && a.m_l == b.m_l && a.s == b.s && (a.n - b.n).abs() == 1 {
                    asymptotic[(i, j)] =
                        hbar * 0.5 * field.rabi_omega * sx_element(a.s, a.m_s, b.m_s);
                }
                if a.n == b.n {
                    angular[(i, j)] = angular_factor(a, b);
                }
            }
        }
        let l_factor = chans.iter().map(|c| (c.l * (c.l + 1)) as f64).collect();
        Ok(Self {
            basis: basis.clone(),
            system: system.clone(),
            rf_omega: field.rf_omega,
            asymptotic,
            angular,
            l_factor,
        })
    }

    pub fn basis(&self) -> &ChannelBasis {
        &self.basis
    }

    pub fn system(&self) -> &TwoAtomSystem {
        &self.system
    }

    pub fn rf_omega(&self) -> f64 {
        self.rf_omega
    }

    /// Zeeman + photon + rf part (J).
    pub fn asymptotic(&self) -> &DMatrix<f64> {
        &self.asymptotic
    }

    /// Dimensionless dipolar angular matrix.
    pub fn angular(&self) -> &DMatrix<f64> {
        &self.angular
    }

    /// Centrifugal energy of each basis channel at `r` (J).
    pub fn centrifugal(&self, r: f64) -> Vec<f64> {
        let c = CODATA.hbar.powi(2) / (2.0 * self.system.reduced_mass * r * r);
        self.l_factor.iter().map(|f| f * c).collect()
    }

    pub fn at(&self, r: f64) -> DMatrix<f64> {
        let mut h = &self.angular * self.system.dipolar_strength(r) + &self.asymptotic;
        for (i, c) in self.centrifugal(r).into_iter().enumerate() {
            h[(i, i)] += c;
        }
        h
    }

    /// Eigenvalues (ascending) and eigenvectors of `H(r)`.
    pub fn eigen(&self, r: f64) -> (Vec<f64>, DMatrix<f64>) {
        sorted_eigen(self.at(r))
    }
}

pub(crate) fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eig.eigenvectors.column(i))
            .collect::<Vec<_>>(),
    );
    (values, vectors)
}

/// `H(R)` on `basis` (J). The basis must be closed under the couplings.
pub fn build_channel_hamiltonian(
    r: f64,
    field: &FieldConfig,
    system: &TwoAtomSystem,
    basis: &ChannelBasis,
) -> Result<DMatrix<f64>> {
    positive("R", r)?;
    Ok(ChannelHamiltonian::new(field, system, basis)?.at(r))
}

/// Eigenstate of the spin-photon part of `H_inf` (triplet, any partial wave).
#[derive(Clone, Debug)]
pub struct DressedState {
    /// Photon manifold, `round(E / hbar w)`.
    pub manifold: i64,
    /// Energy rank inside the manifold, 0 = lowest.
    pub rank: usize,
    /// Asymptotic energy (J).
    pub energy: f64,
    /// `(m_S, n, amplitude)` for every spin-photon component.
    pub components: Vec<(i64, i64, f64)>,
}

impl DressedState {
    /// `(m_S + n) mod 2`, shared by all components.
    pub fn parity(&self) -> i64 {
        let (m, n, _) = self.components[0];
        (m + n).rem_euclid(2)
    }

    /// The product state `|dressed> x |l, m_l>` as a vector on `basis`;
    /// `None` when it lies in another parity block.
    pub fn embed(&self, l: i64, m_l: i64, basis: &ChannelBasis) -> Option<DVector<f64>> {
        let mut v = DVector::zeros(basis.len());
        for &(m_s, n, a) in &self.components {
            let c = Channel {
                s: 1,
                m_s,
                l,
                m_l,
                n,
            };
            v[basis.index_of(&c)?] = a;
        }
        Some(v)
    }
}

/// All triplet spin-photon dressed states for `|n| <= n_max`, diagonalized per
/// parity sector and labelled by manifold and in-manifold energy rank.
pub fn dressed_states(
    field: &FieldConfig,
    system: &TwoAtomSystem,
    n_max: i64,
) -> Result<Vec<DressedState>> {
    field.validate()?;
    system.validate()?;
    let hbar = CODATA.hbar;
    let wl = system.larmor(field);
    let mut out = Vec::new();
    for parity in 0..2 {
        let states: Vec<(i64, i64)> = (-n_max..=n_max)
            .flat_map(|n| (-1..=1).map(move |m| (m, n)))
            .filter(|(m, n)| (m + n).rem_euclid(2) == parity)
            .collect();
        let dim = states.len();
        let mut h = DMatrix::zeros(dim, dim);
        for (i, &(m, n)) in states.iter().enumerate() {
            h[(i, i)] = hbar * (wl * m as f64 + field.rf_omega * n as f64);
            for (j, &(mp, np)) in states.iter().enumerate() {
                if (n - np).abs() == 1 {
                    h[(i, j)] = hbar * 0.5 * field.rabi_omega * sx_element(1, m, mp);
                }
            }
        }
        let (values, vectors) = sorted_eigen(h);
        for (k, e) in values.iter().enumerate() {
            // fix the overall sign: largest component positive
            let col = vectors.column(k);
            let imax = col.iamax();
            let sign = col[imax].signum();
            out.push(DressedState {
                manifold: (e / (hbar * field.rf_omega)).round() as i64,
                rank: 0,
                energy: *e,
                components: states
                    .iter()
                    .zip(col.iter())
                    .map(|(&(m, n), a)| (m, n, sign * a))
                    .collect(),
            });
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    let mut prev = None;
    let mut rank = 0;
    for s in &mut out {
        if prev == Some(s.manifold) {
            rank += 1;
        } else {
            rank = 0;
        }
        s.rank = rank;
        prev = Some(s.manifold);
    }
    Ok(out)
}

/// The dressed state of `manifold` with in-manifold energy `rank`.
pub fn find_dressed(states: &[DressedState], manifold: i64, rank: usize) -> Result<&DressedState> {
    let count = states.iter().filter(|s| s.manifold == manifold).count();
    if count != 3 {
        return Err(Error::invalid(
            "n_max",
            format!("manifold {manifold} holds {count} dressed states instead of 3; raise n_max"),
        ));
    }
    states
        .iter()
        .find(|s| s.manifold == manifold && s.rank == rank)
        .ok_or_else(|| {
            Error::invalid(
                "rank",
                format!("no dressed state of rank {rank} in manifold {manifold}"),
            )
        })
}
