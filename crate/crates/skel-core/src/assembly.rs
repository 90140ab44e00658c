//! Assembly of the interfacial system `C u = r`.
//!
//! Knots on the rectangle boundary get identity rows with the Dirichlet
//! value. Every other knot gets its row from the subdomain(s) it lies in:
//! floating subdomains by the spectral cardinal problems, perimeter
//! subdomains by Monte Carlo.

#[allow(unused_imports)] // unused when std is in the crate graph
use num_traits::Float as _;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::cover::{subdomain_depth, Cover};
use crate::feynmankac::{estimate_row, ExitRegion, McConfig, RowEstimate};
use crate::interp::InterpolantSet;
use crate::linalg::dot;
use crate::problem::EllipticProblem;
use crate::runner::{Sequential, TaskRunner};
use crate::sparse::CsrMatrix;
use crate::spectral::{LocalCoeffs, LocalSolver, SpectralGrid};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum AssemblyMode {
    /// One row per knot from its owner.
    #[default]
    Standard,
    /// Sum of the rows from every subdomain containing the knot.
    Averaged,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Spectral,
    MonteCarlo,
    BoundaryIdentity,
}

impl RowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RowKind::Spectral => "spectral",
            RowKind::MonteCarlo => "monte_carlo",
            RowKind::BoundaryIdentity => "boundary_identity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralConfig {
    pub n_r: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { n_r: 22 }
    }
}

/// Standard errors of one Monte Carlo row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McRowStats {
    pub rhs_stderr: f64,
    pub max_coeff_stderr: f64,
    pub interface_exits: usize,
    pub boundary_exits: usize,
    pub mean_steps: f64,
}

#[derive(Clone, Debug)]
pub struct SkeletalSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub provenance: Vec<RowKind>,
    /// Per-row Monte Carlo statistics (summed over contributions in
    /// averaged mode), `None` for other rows.
    pub mc_stats: Vec<Option<McRowStats>>,
    /// Distinct spectral factorizations computed.
    pub factorizations: usize,
}

impl SkeletalSystem {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }
}

/// One subdomain's contribution to one knot's row (diagonal excluded).
struct Contribution {
    knot: usize,
    subdomain: usize,
    entries: Vec<(usize, f64)>,
    rhs: f64,
    mc: Option<McRowStats>,
}

pub fn assemble_system<R: TaskRunner + ?Sized>(
    cover: &Cover,
    problem: &EllipticProblem,
    interps: &InterpolantSet,
    spectral: &SpectralConfig,
    mc: &McConfig,
    mode: AssemblyMode,
    runner: &R,
) -> Result<SkeletalSystem> {
    mc.validate()?;
    let n = cover.knots.len();
    // (subdomain, knot) pairs that need a row contribution.
    let mut wanted: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in &cover.knots {
        if k.on_boundary {
            continue;
        }
        match mode {
            AssemblyMode::Standard => {
                let owner = k.owner.ok_or_else(|| {
                    Error::CoverValidity(format!("knot {} has no owner", k.id))
                })?;
                wanted.entry(owner).or_default().push(k.id);
            }
            AssemblyMode::Averaged => {
                let mut any = false;
                for s in &cover.subdomains {
                    if s.id != k.host.subdomain && subdomain_depth(&cover.domain, s, k.position) > 0.0 {
                        wanted.entry(s.id).or_default().push(k.id);
                        any = true;
                    }
                }
                if !any {
                    return Err(Error::CoverValidity(format!("knot {} is interior to no subdomain", k.id)));
                }
            }
        }
    }

    let floating: Vec<(usize, Vec<usize>)> = wanted
        .iter()
        .filter(|(s, _)| cover.subdomains[**s].is_floating())
        .map(|(s, k)| (*s, k.clone()))
        .collect();
    let perimeter: Vec<(usize, usize)> = wanted
        .iter()
        .filter(|(s, _)| !cover.subdomains[**s].is_floating())
        .flat_map(|(s, ks)| ks.iter().map(move |k| (*s, *k)))
        .collect();

    let (spectral_parts, factorizations) = spectral_contributions(cover, problem, spectral, &floating, runner)?;

    let mc_parts: Vec<Result<Contribution>> = runner.map(perimeter.len(), |t| {
        let (sid, kid) = perimeter[t];
        let sd = &cover.subdomains[sid];
        let region = ExitRegion::from_subdomain(sd, &cover.domain);
        let stencil: Vec<Vec<usize>> = sd.arcs.iter().map(|a| a.knots.clone()).collect();
        // Distinct streams per (subdomain, knot) pair.
        let stream = ((sid as u64) << 32) | kid as u64;
        let row: RowEstimate = estimate_row(
            problem,
            &region,
            &stencil,
            &interps.per_subdomain[sid],
            kid,
            cover.knots[kid].position,
            &McConfig { seed: mc.seed ^ stream.rotate_left(17), ..mc.clone() },
            &Sequential,
        )?;
        Ok(Contribution {
            knot: kid,
            subdomain: sid,
            entries: row.coeffs,
            rhs: row.rhs,
            mc: Some(McRowStats {
                rhs_stderr: row.rhs_stderr,
                max_coeff_stderr: row.coeff_stderr.iter().fold(0.0, |m, v| m.max(*v)),
                interface_exits: row.interface_exits,
                boundary_exits: row.boundary_exits,
                mean_steps: row.mean_steps,
            }),
        })
    });

    let mut per_knot: Vec<Vec<Contribution>> = (0..n).map(|_| Vec::new()).collect();
    for c in spectral_parts {
        per_knot[c.knot].push(c);
    }
    for c in mc_parts {
        let c = c?;
        per_knot[c.knot].push(c);
    }

    let mut rows = Vec::with_capacity(n);
    let mut rhs = vec![0.0; n];
    let mut provenance = Vec::with_capacity(n);
    let mut mc_stats = vec![None; n];
    for (i, mut parts) in per_knot.into_iter().enumerate() {
        let knot = &cover.knots[i];
        if knot.on_boundary {
            rows.push(vec![(i, 1.0)]);
            rhs[i] = problem.g.eval(knot.position);
            provenance.push(RowKind::BoundaryIdentity);
            continue;
        }
        parts.sort_by_key(|c| c.subdomain);
        let mut entries = vec![(i, parts.len() as f64)];
        let mut r = 0.0;
        let mut kind = RowKind::Spectral;
        let mut stats: Option<McRowStats> = None;
        for c in parts {
            entries.extend(c.entries.iter().copied());
            r += c.rhs;
            if let Some(m) = c.mc {
                kind = RowKind::MonteCarlo;
                stats = Some(match stats {
                    None => m,
                    Some(s) => McRowStats {
                        rhs_stderr: (s.rhs_stderr * s.rhs_stderr + m.rhs_stderr * m.rhs_stderr).sqrt(),
                        max_coeff_stderr: s.max_coeff_stderr.max(m.max_coeff_stderr),
                        interface_exits: s.interface_exits + m.interface_exits,
                        boundary_exits: s.boundary_exits + m.boundary_exits,
                        mean_steps: 0.5 * (s.mean_steps + m.mean_steps),
                    },
                });
            }
        }
        rows.push(entries);
        rhs[i] = r;
        provenance.push(kind);
        mc_stats[i] = stats;
    }
    Ok(SkeletalSystem {
        matrix: CsrMatrix::from_rows(n, rows)?,
        rhs,
        provenance,
        mc_stats,
        factorizations,
    })
}

/// Rows from floating subdomains: group discs with identical operators,
/// factorize each distinct operator once, then evaluate the cardinal and
/// source fields at the requested knots.
fn spectral_contributions<R: TaskRunner + ?Sized>(
    cover: &Cover,
    problem: &EllipticProblem,
    spectral: &SpectralConfig,
    floating: &[(usize, Vec<usize>)],
    runner: &R,
) -> Result<(Vec<Contribution>, usize)> {
    let grids: Vec<Result<(SpectralGrid, Vec<LocalCoeffs>)>> = runner.map(floating.len(), |t| {
        let sd = &cover.subdomains[floating[t].0];
        let grid = SpectralGrid::for_subdomain(sd, sd.stencil_len(), spectral.n_r)?;
        let coeffs = grid.sample_coeffs(problem)?;
        Ok((grid, coeffs))
    });
    let grids: Vec<(SpectralGrid, Vec<LocalCoeffs>)> = grids.into_iter().collect::<Result<_>>()?;

    // Distinct operators, in first-seen order.
    let mut unique: Vec<usize> = Vec::new();
    let mut operator_of = Vec::with_capacity(grids.len());
    for (t, (g, c)) in grids.iter().enumerate() {
        let found = unique.iter().position(|&u| {
            let (gu, cu) = &grids[u];
            gu.n_theta() == g.n_theta()
                && gu.n_r() == g.n_r()
                && gu.radius().to_bits() == g.radius().to_bits()
                && cu == c
        });
        operator_of.push(match found {
            Some(p) => p,
            None => {
                unique.push(t);
                unique.len() - 1
            }
        });
    }
    let solvers: Vec<Result<Arc<LocalSolver>>> = runner.map(unique.len(), |u| {
        let (g, c) = &grids[unique[u]];
        LocalSolver::new(g, c)
            .map(Arc::new)
            .map_err(|e| Error::Factorization(format!("subdomain {}: {e}", floating[unique[u]].0)))
    });
    let solvers: Vec<Arc<LocalSolver>> = solvers.into_iter().collect::<Result<_>>()?;

    let parts: Vec<Result<Vec<Contribution>>> = runner.map(floating.len(), |t| {
        let (sid, knots) = &floating[t];
        let sd = &cover.subdomains[*sid];
        let (grid, _) = &grids[t];
        let solver = &solvers[operator_of[t]];
        let source = solver.solve_source(grid, problem);
        let stencil: Vec<usize> = sd.stencil().collect();
        knots
            .iter()
            .map(|&kid| {
                let w = grid
                    .eval_weights(cover.knots[kid].position)
                    .map_err(|e| Error::Evaluation(format!("knot {kid}: {e}")))?;
                let entries = stencil
                    .iter()
                    .zip(solver.cardinal_fields())
                    .map(|(&col, g)| (col, dot(&w, g)))
                    .collect();
                Ok(Contribution { knot: kid, subdomain: *sid, entries, rhs: dot(&w, &source), mc: None })
            })
            .collect()
    });
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok((out, unique.len()))
}
