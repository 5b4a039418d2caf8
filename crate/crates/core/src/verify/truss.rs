//! Classical direct stiffness method for bar frameworks, written without the
//! operator-pair machinery so it can serve as an oracle for it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::framework::BarFramework;
use crate::linalg::{numerical_rank, DEFAULT_RANK_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct DirectStiffness {
    pub tensions: DVector<f64>,
    /// All dofs, prescribed values included.
    pub displacements: DVector<f64>,
}

/// Assembles `K` from `k/L · [d dᵀ, −d dᵀ; −d dᵀ, d dᵀ]` bar matrices, solves
/// `K_ff u_f = f_f − K_fp u_p` densely and post-processes `t = k/L · d·Δu`.
pub fn direct_stiffness(fw: &BarFramework<f64>) -> Result<DirectStiffness> {
    let dim = fw.dim();
    let n = fw.dof_count();
    let nodes = fw.nodes();
    let mut k_global = DMatrix::zeros(n, n);
    let mut directions = Vec::with_capacity(fw.bars().len());
    for bar in fw.bars() {
        let [i, j] = bar.nodes;
        let delta: Vec<f64> = (0..dim).map(|a| nodes[j][a] - nodes[i][a]).collect();
        let len = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
        let d: Vec<f64> = delta.iter().map(|v| v / len).collect();
        let axial = bar.stiffness / len;
        for a in 0..dim {
            for b in 0..dim {
                let v = axial * d[a] * d[b];
                k_global[(dim * i + a, dim * i + b)] += v;
                k_global[(dim * j + a, dim * j + b)] += v;
                k_global[(dim * i + a, dim * j + b)] -= v;
                k_global[(dim * j + a, dim * i + b)] -= v;
            }
        }
        directions.push((axial, d));
    }

    let pinned = fw.pinned();
    let free: Vec<usize> = (0..n).filter(|d| !pinned.contains_key(d)).collect();
    let mut u = DVector::zeros(n);
    for (&d, &v) in pinned {
        u[d] = v;
    }
    let kff = DMatrix::from_fn(free.len(), free.len(), |r, c| k_global[(free[r], free[c])]);
    let rank = numerical_rank(&kff, DEFAULT_RANK_TOL);
    if rank < free.len() {
        return Err(Error::MechanismPresent {
            mechanisms: free.len() - rank,
        });
    }
    let mut f_full = DVector::zeros(n);
    for (&d, &v) in fw.loads() {
        f_full[d] = v;
    }
    let coupling = &k_global * &u;
    let rhs = DVector::from_fn(free.len(), |r, _| f_full[free[r]] - coupling[free[r]]);
    let uf = kff
        .cholesky()
        .ok_or(Error::MechanismPresent { mechanisms: 1 })?
        .solve(&rhs);
    for (r, &d) in free.iter().enumerate() {
        u[d] = uf[r];
    }

    let tensions = DVector::from_iterator(
        fw.bars().len(),
        fw.bars().iter().zip(&directions).map(|(bar, (axial, d))| {
            let [i, j] = bar.nodes;
            axial * (0..dim).map(|a| d[a] * (u[dim * j + a] - u[dim * i + a])).sum::<f64>()
        }),
    );
    Ok(DirectStiffness {
        tensions,
        displacements: u,
    })
}

fn relative_deviation(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let diff = (a - b).amax();
    let scale = b.amax();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Largest relative deviation (tensions and displacements) between the
/// framework's stress solve and [`direct_stiffness`].
pub fn framework_cross_check(fw: &BarFramework<f64>) -> Result<f64> {
    let ours = fw.solve_bar_stress()?;
    let oracle = direct_stiffness(fw)?;
    Ok(relative_deviation(&ours.tensions, &oracle.tensions)
        .max(relative_deviation(&ours.displacements, &oracle.displacements)))
}

/// A jittered triangulated `nx × ny` grid (at most 49 nodes): one random
/// diagonal per cell, a crossing diagonal in about a quarter of the cells,
/// stiffness in `[0.5, 2]`, supported either pin-plus-roller or along the whole
/// bottom row, with random prescribed values and loads.
pub fn random_framework<R: Rng>(rng: &mut R) -> BarFramework<f64> {
    let nx = rng.gen_range(2..=7);
    let ny = rng.gen_range(2..=7);
    let mut fw = BarFramework::new(2).expect("dim 2");
    for j in 0..ny {
        for i in 0..nx {
            let x = i as f64 + rng.gen_range(-0.2..0.2);
            let y = j as f64 + rng.gen_range(-0.2..0.2);
            fw.add_node(&[x, y]).expect("finite");
        }
    }
    let id = |i: usize, j: usize| j * nx + i;
    let add = |fw: &mut BarFramework<f64>, a: usize, b: usize, rng: &mut R| {
        fw.add_bar(a, b, rng.gen_range(0.5..2.0)).expect("distinct jittered nodes");
    };
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx {
                add(&mut fw, id(i, j), id(i + 1, j), rng);
            }
            if j + 1 < ny {
                add(&mut fw, id(i, j), id(i, j + 1), rng);
            }
            if i + 1 < nx && j + 1 < ny {
                let rising = rng.gen_bool(0.5);
                if rising || rng.gen_bool(0.25) {
                    add(&mut fw, id(i, j), id(i + 1, j + 1), rng);
                }
                if !rising || rng.gen_bool(0.25) {
                    add(&mut fw, id(i + 1, j), id(i, j + 1), rng);
                }
            }
        }
    }
    let prescribe = |rng: &mut R| {
        if rng.gen_bool(0.5) {
            rng.gen_range(-0.01..0.01)
        } else {
            0.0
        }
    };
    if rng.gen_bool(0.5) {
        let (a, b) = (prescribe(rng), prescribe(rng));
        fw.pin(id(0, 0), 0, a).expect("valid pin");
        fw.pin(id(0, 0), 1, b).expect("valid pin");
        let c = prescribe(rng);
        fw.pin(id(nx - 1, 0), 1, c).expect("valid pin");
    } else {
        for i in 0..nx {
            let (a, b) = (prescribe(rng), prescribe(rng));
            fw.pin(id(i, 0), 0, a).expect("valid pin");
            fw.pin(id(i, 0), 1, b).expect("valid pin");
        }
    }
    for node in 0..nx * ny {
        for axis in 0..2 {
            if !fw.pinned().contains_key(&(2 * node + axis)) && rng.gen_bool(0.5) {
                fw.load(node, axis, rng.gen_range(-1.0..1.0)).expect("free dof");
            }
        }
    }
    fw
}
