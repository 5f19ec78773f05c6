//! Adiabatic molecular potentials and the entrance/exit avoided crossing.

use nalgebra::{DMatrix, DVector};

use super::channels::{default_n_max, ChannelBasis};
use super::hamiltonian::{
    dressed_states, find_dressed, sorted_eigen, ChannelHamiltonian, DressedState, TwoAtomSystem,
};
use crate::constants::CODATA;
use crate::error::{positive, Error};
use crate::field::FieldConfig;
use crate::roots::{brent, golden_section};
use crate::sweep;
use crate::Result;

/// Neighbouring eigenvectors overlapping less than this are flagged.
pub const AMBIGUOUS_OVERLAP: f64 = 0.7;

/// Inner cut-off of the potential curves (Bohr radii).
pub const R_MIN_A0: f64 = 200.0;

/// `R_c` solving `l(l+1) hbar^2 / (2 mu R^2) = hbar w` (m).
pub fn crossing_radius(rf_omega: f64, l_out: i64, reduced_mass: f64) -> Result<f64> {
    positive("rf_omega", rf_omega)?;
    positive("reduced_mass", reduced_mass)?;
    if l_out < 1 {
        return Err(Error::invalid(
            "l_out",
            format!("must be >= 1, got {l_out}"),
        ));
    }
    Ok(((l_out * (l_out + 1)) as f64 * CODATA.hbar / (2.0 * reduced_mass * rf_omega)).sqrt())
}

/// Asymptotic label of an adiabatic curve: dressed spin-photon state times partial wave.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurveLabel {
    pub manifold: i64,
    pub rank: usize,
    pub l: i64,
    pub m_l: i64,
}

#[derive(Clone, Debug)]
pub struct PotentialCurve {
    /// Interatomic distances, descending (m).
    pub r_grid: Vec<f64>,
    /// `energies[k][i]`: curve `k` at `r_grid[i]` (J).
    pub energies: Vec<Vec<f64>>,
    /// Asymptotic label of each curve, assigned at `r_grid[0]`.
    pub labels: Vec<CurveLabel>,
    /// Grid indices whose connection to the previous point had an overlap
    /// below [`AMBIGUOUS_OVERLAP`]; refine the grid there.
    pub ambiguous: Vec<usize>,
}

impl PotentialCurve {
    pub fn find(&self, label: CurveLabel) -> Option<usize> {
        self.labels.iter().position(|l| *l == label)
    }
}

fn product_states<'a>(
    dressed: &'a [DressedState],
    basis: &'a ChannelBasis,
) -> impl Iterator<Item = (CurveLabel, DVector<f64>)> + 'a {
    dressed.iter().flat_map(move |d| {
        [0i64, 2].into_iter().flat_map(move |l| {
            (-l..=l).filter_map(move |m_l| {
                d.embed(l, m_l, basis).map(|v| {
                    (
                        CurveLabel {
                            manifold: d.manifold,
                            rank: d.rank,
                            l,
                            m_l,
                        },
                        v,
                    )
                })
            })
        })
    })
}

/// Diagonalizes `H(R)` on every grid point and connects eigenvectors of
/// neighbouring points by maximal overlap.
pub fn adiabatic_potentials(
    r_grid: &[f64],
    field: &FieldConfig,
    system: &TwoAtomSystem,
    basis: &ChannelBasis,
) -> Result<PotentialCurve> {
    if r_grid.is_empty() {
        return Err(Error::invalid("r_grid", "empty"));
    }
    for r in r_grid {
        positive("R", *r)?;
    }
    if r_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("r_grid", "must be strictly descending"));
    }
    let ham = ChannelHamiltonian::new(field, system, basis)?;
    let eig = sweep::map(r_grid, |&r| ham.eigen(r));
    let dim = basis.len();

    let dressed = dressed_states(field, system, basis.n_max())?;
    let (_, v0) = &eig[0];
    let mut labels = vec![
        CurveLabel {
            manifold: 0,
            rank: 0,
            l: 0,
            m_l: 0
        };
        dim
    ];
    let mut best = vec![-1.0; dim];
    for (label, p) in product_states(&dressed, basis) {
        let w = v0.transpose() * &p;
        for k in 0..dim {
            let o = w[k] * w[k];
            if o > best[k] {
                best[k] = o;
                labels[k] = label;
            }
        }
    }

    // order[k] = eigen index at the current point followed by curve k
    let mut order: Vec<usize> = (0..dim).collect();
    let mut energies = vec![Vec::with_capacity(r_grid.len()); dim];
    for (k, e) in energies.iter_mut().enumerate() {
        e.push(eig[0].0[k]);
    }
    let mut ambiguous = Vec::new();
    for i in 1..r_grid.len() {
        let (prev_v, (vals, vecs)) = (&eig[i - 1].1, &eig[i]);
        let overlap = prev_v.transpose() * vecs;
        let (assign, min_overlap) = greedy_assignment(&overlap);
        if min_overlap < AMBIGUOUS_OVERLAP {
            ambiguous.push(i);
        }
        for k in 0..dim {
            order[k] = assign[order[k]];
            energies[k].push(vals[order[k]]);
        }
    }
    Ok(PotentialCurve {
        r_grid: r_grid.to_vec(),
        energies,
        labels,
        ambiguous,
    })
}

/// Assigns every row (old vector) a column (new vector), taking the largest
/// squared overlaps first. Returns the map and the smallest accepted overlap.
fn greedy_assignment(overlap: &DMatrix<f64>) -> (Vec<usize>, f64) {
    let n = overlap.nrows();
    let mut pairs: Vec<(usize, usize, f64)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let o = overlap[(i, j)] * overlap[(i, j)];
            if o > 1e-6 {
                pairs.push((i, j, o));
            }
        }
    }
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2));
    let mut assign = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut min_overlap = 1.0f64;
    for (i, j, o) in pairs {
        if assign[i] == usize::MAX && !taken[j] {
            assign[i] = j;
            taken[j] = true;
            min_overlap = min_overlap.min(o);
        }
    }
    let mut free = (0..n).filter(|j| !taken[*j]);
    for a in assign.iter_mut() {
        if *a == usize::MAX {
            *a = free.next().expect("as many columns as rows");
            min_overlap = 0.0;
        }
    }
    (assign, min_overlap)
}

/// Exit channel of the lower (`n - 1`) manifold: dressed spin state by energy
/// rank (0 = lowest) and d-wave projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExitChannel {
    pub rank: usize,
    pub m_l: i64,
}

impl Default for ExitChannel {
    /// The d-wave `m_l = -1` channel of the highest dressed state of the lower manifold.
    fn default() -> Self {
        Self { rank: 2, m_l: -1 }
    }
}

#[derive(Clone, Debug)]
pub struct GapSettings {
    pub exit: ExitChannel,
    /// Floquet truncation; `None` selects [`default_n_max`].
    pub n_max: Option<i64>,
    /// Coarse-grid points across the search window.
    pub coarse_points: usize,
    /// Half-width of the search window relative to the diabatic crossing.
    pub window: f64,
    /// Golden-section tolerance relative to the crossing radius.
    pub r_tol: f64,
}

impl Default for GapSettings {
    fn default() -> Self {
        Self {
            exit: ExitChannel::default(),
            n_max: None,
            coarse_points: 41,
            window: 0.1,
            r_tol: 1e-10,
        }
    }
}

impl GapSettings {
    pub fn n_max_for(&self, field: &FieldConfig) -> i64 {
        self.n_max.unwrap_or_else(|| default_n_max(field.ratio()))
    }
}

/// Result of the gap search; the loss-rate fields stay `None` until
/// [`LossEstimate::with_rate`] supplies a reference `K2` and density.
#[derive(Clone, Debug, PartialEq)]
pub struct LossEstimate {
    /// Minimum adiabatic splitting `Delta E_g` (J).
    pub gap: f64,
    /// Distance of the minimum (m).
    pub r_c: f64,
    /// Where the diagonal entrance and exit energies cross (m).
    pub r_diabatic: f64,
    /// Two-level prediction `2 |W|` from the dressed coupling at `r_diabatic` (J).
    pub two_level_gap: f64,
    /// Two-body loss coefficient (m^3/s).
    pub k2_scale: Option<f64>,
    /// `1 / (K2 n)` (s).
    pub lifetime_scale: Option<f64>,
}

impl LossEstimate {
    pub fn with_rate(mut self, k2: f64, density: f64) -> Result<Self> {
        positive("k2", k2)?;
        positive("density", density)?;
        self.k2_scale = Some(k2);
        self.lifetime_scale = Some(1.0 / (k2 * density));
        Ok(self)
    }
}

/// Entrance and exit as vectors on a closed basis, with the crossing problem
/// they define.
pub struct CrossingProblem {
    pub hamiltonian: ChannelHamiltonian,
    pub entrance: DVector<f64>,
    /// The `m_l` member of the exit multiplet named in the settings.
    pub exit: DVector<f64>,
    /// Normalized combination of the exit multiplet that the entrance couples to.
    pub bright_exit: DVector<f64>,
}

impl CrossingProblem {
    pub fn new(
        field: &FieldConfig,
        system: &TwoAtomSystem,
        settings: &GapSettings,
    ) -> Result<Self> {
        let n_max = settings.n_max_for(field);
        let basis = ChannelBasis::triplet(n_max)?;
        let hamiltonian = ChannelHamiltonian::new(field, system, &basis)?;
        let dressed = dressed_states(field, system, n_max)?;
        let entrance = find_dressed(&dressed, 0, 0)?
            .embed(0, 0, &basis)
            .ok_or_else(|| Error::invalid("basis", "entrance outside the parity block"))?;
        let exit_state = find_dressed(&dressed, -1, settings.exit.rank)?;
        let exit = exit_state
            .embed(2, settings.exit.m_l, &basis)
            .ok_or_else(|| {
                Error::NoAvoidedCrossing(format!(
                    "exit rank {} with m_l = {} lies in another parity block",
                    settings.exit.rank, settings.exit.m_l
                ))
            })?;
        let coupling = entrance.transpose() * hamiltonian.angular();
        let mut bright = DVector::zeros(basis.len());
        for m_l in -2..=2 {
            if let Some(v) = exit_state.embed(2, m_l, &basis) {
                let w = (&coupling * &v)[(0, 0)];
                bright += v * w;
            }
        }
        let norm = bright.norm();
        let bright_exit = if norm > 0.0 {
            bright / norm
        } else {
            exit.clone()
        };
        Ok(Self {
            hamiltonian,
            entrance,
            exit,
            bright_exit,
        })
    }

    fn diagonal(&self, v: &DVector<f64>, r: f64) -> f64 {
        (v.transpose() * self.hamiltonian.at(r) * v)[(0, 0)]
    }

    /// `<entrance|H(r)|bright exit>` (J).
    pub fn coupling(&self, r: f64) -> f64 {
        (self.entrance.transpose() * self.hamiltonian.at(r) * &self.bright_exit)[(0, 0)]
    }

    /// Root of `<in|H|in> = <exit|H|exit>` (m).
    pub fn diabatic_crossing(&self) -> Result<f64> {
        let a0 = CODATA.a0;
        let f = |r: f64| self.diagonal(&self.entrance, r) - self.diagonal(&self.exit, r);
        let (lo, hi) = (R_MIN_A0 * a0, 1e5 * a0);
        if f(lo).signum() == f(hi).signum() {
            return Err(Error::NoAvoidedCrossing(
                "entrance and exit diagonal energies do not cross".into(),
            ));
        }
        brent(f, lo, hi, 1e-12 * a0)
    }

    /// Splitting between the most entrance-like eigenstate and the most
    /// entrance-or-exit-like of the others (J).
    pub fn splitting(&self, r: f64) -> f64 {
        let (vals, vecs) = self.hamiltonian.eigen(r);
        let w_in = vecs.transpose() * &self.entrance;
        let w_out = vecs.transpose() * &self.bright_exit;
        let a = w_in.iamax();
        let b = (0..vals.len())
            .filter(|&k| k != a)
            .max_by(|&i, &j| {
                let si = w_in[i].powi(2) + w_out[i].powi(2);
                let sj = w_in[j].powi(2) + w_out[j].powi(2);
                si.total_cmp(&sj)
            })
            .expect("dimension >= 2");
        (vals[a] - vals[b]).abs()
    }
}

/// `Delta E_g`: the smallest entrance/exit splitting near the diabatic
/// crossing, from a coarse grid refined by golden-section search.
pub fn crossing_gap(
    field: &FieldConfig,
    system: &TwoAtomSystem,
    settings: &GapSettings,
) -> Result<LossEstimate> {
    if field.rabi_omega == 0.0 {
        return Err(Error::NoAvoidedCrossing(
            "no rf coupling between manifolds at zero rf power".into(),
        ));
    }
    if settings.coarse_points < 3 || !(settings.window > 0.0 && settings.window < 1.0) {
        return Err(Error::invalid(
            "settings",
            "need >= 3 coarse points and 0 < window < 1",
        ));
    }
    let problem = CrossingProblem::new(field, system, settings)?;
    let r_x = problem.diabatic_crossing()?;
    let two_level_gap = 2.0 * problem.coupling(r_x).abs();
    let (r_min, gap) = minimize_splitting(|r| problem.splitting(r), r_x, settings)?;
    Ok(LossEstimate {
        gap,
        r_c: r_min,
        r_diabatic: r_x,
        two_level_gap,
        k2_scale: None,
        lifetime_scale: None,
    })
}

fn minimize_splitting<F: Fn(f64) -> f64 + Sync>(
    split: F,
    r_x: f64,
    settings: &GapSettings,
) -> Result<(f64, f64)> {
    let grid = sweep::linspace(
        r_x * (1.0 - settings.window),
        r_x * (1.0 + settings.window),
        settings.coarse_points,
    );
    let values = sweep::map(&grid, |&r| split(r));
    let i = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    if i == 0 || i == grid.len() - 1 {
        return Err(Error::NoAvoidedCrossing(format!(
            "splitting minimum at the edge of the search window (R = {:.1} a0)",
            grid[i] / CODATA.a0
        )));
    }
    let (r, s) = golden_section(&split, grid[i - 1], grid[i + 1], settings.r_tol * r_x);
    if s <= 0.0 {
        return Err(Error::NoAvoidedCrossing("exact crossing".into()));
    }
    Ok((r, s))
}

/// Gap of the 2x2 cut `{entrance, bright exit}` of the dressed Hamiltonian,
/// found with the same search as [`crossing_gap`].
pub fn two_channel_gap(
    field: &FieldConfig,
    system: &TwoAtomSystem,
    settings: &GapSettings,
) -> Result<(f64, f64)> {
    let problem = CrossingProblem::new(field, system, settings)?;
    let r_x = problem.diabatic_crossing()?;
    let vecs = DMatrix::from_columns(&[problem.entrance.clone(), problem.bright_exit.clone()]);
    let cut = |r: f64| {
        let h = vecs.transpose() * problem.hamiltonian.at(r) * &vecs;
        let (vals, _) = sorted_eigen(h);
        vals[1] - vals[0]
    };
    let (_, gap) = minimize_splitting(cut, r_x, settings)?;
    Ok((gap, 2.0 * problem.coupling(r_x).abs()))
}
