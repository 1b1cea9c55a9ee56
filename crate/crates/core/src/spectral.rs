//! Dense linear algebra on networks: Laplacians, effective resistances,
//! Schur-complement reduction, exact hitting times and the GFF covariance.
//!
//! Everything here is a pure function of an immutable [`Network`]; dense
//! factorizations are intended for networks of at most a few thousand
//! vertices.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::network::Network;

/// Conductance Laplacian: `L_uu = c_u − c_uu`, `L_uv = −c_uv`.
pub fn laplacian(net: &Network) -> DMatrix<f64> {
    let n = net.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for u in 0..n {
        l[(u, u)] = net.escape_conductance(u);
        for (v, c) in net.neighbors(u) {
            l[(u, v)] = -c;
        }
    }
    l
}

/// The Laplacian with the rows and columns of a ground set removed.
#[derive(Debug, Clone)]
pub struct GroundedLaplacian {
    pub matrix: DMatrix<f64>,
    /// Sorted ground set.
    pub ground: Vec<usize>,
    /// Vertices kept, in matrix order.
    pub free: Vec<usize>,
    /// `position[v]` is the matrix index of `v`, `None` when grounded.
    pub position: Vec<Option<usize>>,
}

impl GroundedLaplacian {
    pub fn new(net: &Network, ground: &[usize]) -> Result<Self> {
        let n = net.vertex_count();
        let mut grounded = vec![false; n];
        for &g in ground {
            net.check_vertex(g)?;
            grounded[g] = true;
        }
        if !grounded.iter().any(|&b| b) {
            return Err(Error::InvalidSet("ground set is empty".into()));
        }
        let free: Vec<usize> = (0..n).filter(|&v| !grounded[v]).collect();
        let mut position = vec![None; n];
        for (i, &v) in free.iter().enumerate() {
            position[v] = Some(i);
        }
        let m = free.len();
        let mut matrix = DMatrix::zeros(m, m);
        for (i, &u) in free.iter().enumerate() {
            matrix[(i, i)] = net.escape_conductance(u);
            for (v, c) in net.neighbors(u) {
                if let Some(j) = position[v] {
                    matrix[(i, j)] = -c;
                }
            }
        }
        Ok(GroundedLaplacian {
            matrix,
            ground: (0..n).filter(|&v| grounded[v]).collect(),
            free,
            position,
        })
    }

    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.matrix.clone())
            .ok_or_else(|| Error::Singular(format!("grounded Laplacian of order {} is not positive definite", self.free.len())))
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        Ok(self.cholesky()?.inverse())
    }
}

/// `R_eff(u, v)` from the system grounded at `v`.
pub fn effective_resistance(net: &Network, u: usize, v: usize) -> Result<f64> {
    net.check_vertex(u)?;
    net.check_vertex(v)?;
    if u == v {
        return Ok(0.0);
    }
    let g = GroundedLaplacian::new(net, &[v])?;
    let i = g.position[u].expect("u is free");
    let mut rhs = DVector::zeros(g.free.len());
    rhs[i] = 1.0;
    let x = g.cholesky()?.solve(&rhs);
    Ok(x[i])
}

/// `R_eff(v, S)`: the `(v, v)` entry of the inverse Laplacian grounded at `S`,
/// which is also `Var(η_v | η_S)`.
pub fn effective_resistance_to_set(net: &Network, v: usize, set: &[usize]) -> Result<f64> {
    net.check_vertex(v)?;
    if set.is_empty() {
        return Err(Error::InvalidSet("conditioning set is empty".into()));
    }
    if set.contains(&v) {
        return Err(Error::VertexInSet { vertex: v });
    }
    let g = GroundedLaplacian::new(net, set)?;
    let i = g.position[v].expect("v is free");
    let mut rhs = DVector::zeros(g.free.len());
    rhs[i] = 1.0;
    Ok(g.cholesky()?.solve(&rhs)[i])
}

/// Harmonic measure from `v` on `S` (`a_u = P_v(X_{τ_S} = u)`) and `R_eff(v, S)`.
pub fn harmonic_measure(net: &Network, v: usize, set: &[usize]) -> Result<(Vec<(usize, f64)>, f64)> {
    net.check_vertex(v)?;
    if set.contains(&v) {
        return Err(Error::VertexInSet { vertex: v });
    }
    let g = GroundedLaplacian::new(net, set)?;
    let chol = g.cholesky()?;
    let i = g.position[v].expect("v is free");
    // Row i of L_UU^{-1}; a_u = Σ_x (L_UU^{-1})_{v x} c_{x u}.
    let mut e = DVector::zeros(g.free.len());
    e[i] = 1.0;
    let green = chol.solve(&e);
    let weights = g
        .ground
        .iter()
        .map(|&u| {
            let a: f64 = net
                .neighbors(u)
                .filter_map(|(x, c)| g.position[x].map(|j| green[j] * c))
                .sum();
            (u, a)
        })
        .collect();
    Ok((weights, green[i]))
}

/// All pairwise effective resistances.
pub fn resistance_matrix(net: &Network) -> Result<DMatrix<f64>> {
    let cov = covariance_matrix(net)?;
    let n = net.vertex_count();
    Ok(DMatrix::from_fn(n, n, |u, v| {
        if u == v {
            0.0
        } else {
            (cov[(u, u)] + cov[(v, v)] - 2.0 * cov[(u, v)]).max(0.0)
        }
    }))
}

/// Reduced network on `keep` via the Schur complement of the Laplacian.
///
/// Vertex `i` of the result is the `i`-th smallest kept vertex. Total
/// conductances are preserved by assigning the deficit to self-loops.
pub fn reduce_network(net: &Network, keep: &[usize]) -> Result<Network> {
    let n = net.vertex_count();
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    for &v in &kept {
        net.check_vertex(v)?;
    }
    if !kept.contains(&net.root()) {
        return Err(Error::InvalidSet("kept set must contain the root".into()));
    }
    if kept.len() < 2 {
        return Err(Error::InvalidSet("kept set needs at least two vertices".into()));
    }
    let k = kept.len();
    let schur = if k == n {
        laplacian(net)
    } else {
        let g = GroundedLaplacian::new(net, &kept)?;
        let chol = g.cholesky()?;
        let full = laplacian(net);
        let l_kk = DMatrix::from_fn(k, k, |i, j| full[(kept[i], kept[j])]);
        let l_uk = DMatrix::from_fn(g.free.len(), k, |i, j| full[(g.free[i], kept[j])]);
        let x = chol.solve(&l_uk);
        l_kk - l_uk.transpose() * x
    };
    let mut edges = Vec::new();
    for i in 0..k {
        let ci = net.total_conductance(kept[i]);
        let mut off = 0.0;
        for j in 0..k {
            if i == j {
                continue;
            }
            let c = -schur[(i, j)];
            let tol = 1e-12 * (ci + net.total_conductance(kept[j]));
            if c > tol {
                off += c;
                if i < j {
                    edges.push((i, j, c));
                }
            }
        }
        let lp = ci - off;
        if lp > 1e-12 * ci {
            edges.push((i, i, lp));
        }
    }
    let root = kept.binary_search(&net.root()).expect("root kept");
    Network::from_edges(k, edges, root)
}

/// Expected hitting times of `target` from every vertex (continuous time with
/// mean-one holdings, which equals the expected number of discrete steps).
pub fn hitting_times_to(net: &Network, target: usize) -> Result<Vec<f64>> {
    net.check_vertex(target)?;
    let n = net.vertex_count();
    if n == 1 {
        return Ok(vec![0.0]);
    }
    // (I − P) h = 1 on V∖{target} is L_g h = (c_x)_x.
    let g = GroundedLaplacian::new(net, &[target])?;
    let rhs = DVector::from_iterator(g.free.len(), g.free.iter().map(|&x| net.total_conductance(x)));
    let h = g.cholesky()?.solve(&rhs);
    let mut out = vec![0.0; n];
    for (i, &x) in g.free.iter().enumerate() {
        out[x] = h[i];
    }
    Ok(out)
}

pub fn hitting_time(net: &Network, u: usize, v: usize) -> Result<f64> {
    net.check_vertex(u)?;
    Ok(hitting_times_to(net, v)?[u])
}

/// All hitting times from the resistance matrix,
/// `t_hit(u, v) = ½ [c_G R(u,v) + Σ_x c_x (R(v,x) − R(u,x))]`.
pub fn hitting_time_matrix(net: &Network) -> Result<DMatrix<f64>> {
    let r = resistance_matrix(net)?;
    let n = net.vertex_count();
    let c_total = net.conductance_sum();
    let s: Vec<f64> = (0..n)
        .map(|x| (0..n).map(|y| net.total_conductance(y) * r[(x, y)]).sum())
        .collect();
    Ok(DMatrix::from_fn(n, n, |u, v| {
        if u == v {
            0.0
        } else {
            0.5 * (c_total * r[(u, v)] + s[v] - s[u])
        }
    }))
}

/// `t_hit(G) = max_{u,v} t_hit(u, v)`.
pub fn max_hitting_time(net: &Network) -> Result<f64> {
    Ok(hitting_time_matrix(net)?.max())
}

/// The same maximum by one first-step solve per target.
pub fn max_hitting_time_by_solves(net: &Network) -> Result<f64> {
    let mut best: f64 = 0.0;
    for v in 0..net.vertex_count() {
        for h in hitting_times_to(net, v)? {
            best = best.max(h);
        }
    }
    Ok(best)
}

/// Covariance of the GFF pinned at the root together with a lower-triangular
/// factor, `factor · factorᵀ = cov`.
#[derive(Debug, Clone)]
pub struct GffCovariance {
    pub cov: DMatrix<f64>,
    pub factor: DMatrix<f64>,
    /// Diagonal jitter that was needed to factor `cov` (0 when none).
    pub jitter: f64,
}

fn covariance_matrix(net: &Network) -> Result<DMatrix<f64>> {
    let n = net.vertex_count();
    let root = net.root();
    let mut cov = DMatrix::zeros(n, n);
    if n == 1 {
        return Ok(cov);
    }
    let g = GroundedLaplacian::new(net, &[root])?;
    let inv = g.inverse()?;
    for (i, &u) in g.free.iter().enumerate() {
        for (j, &v) in g.free.iter().enumerate() {
            cov[(u, v)] = 0.5 * (inv[(i, j)] + inv[(j, i)]);
        }
    }
    Ok(cov)
}

/// Cholesky with the bounded jitter policy: on failure add
/// `1e-12 · trace/n` to the diagonal and escalate by ×10 up to `1e-8 · trace/n`.
pub fn jittered_cholesky(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return Ok((ch.l(), 0.0));
    }
    let n = m.nrows().max(1) as f64;
    let scale = m.trace() / n;
    let mut rel = 1e-12;
    while rel <= 1e-8 * (1.0 + 1e-9) {
        let jitter = rel * scale;
        let mut shifted = m.clone();
        for i in 0..m.nrows() {
            shifted[(i, i)] += jitter;
        }
        if let Some(ch) = Cholesky::new(shifted) {
            return Ok((ch.l(), jitter));
        }
        rel *= 10.0;
    }
    let min_pivot = (0..m.nrows()).map(|i| m[(i, i)]).fold(f64::INFINITY, f64::min);
    Err(Error::Factorization {
        jitter: 1e-8 * scale,
        min_pivot,
        trace: m.trace(),
    })
}

pub fn gff_covariance(net: &Network) -> Result<GffCovariance> {
    let n = net.vertex_count();
    let root = net.root();
    let cov = covariance_matrix(net)?;
    let mut factor = DMatrix::zeros(n, n);
    let mut jitter = 0.0;
    if n > 1 {
        let free: Vec<usize> = (0..n).filter(|&v| v != root).collect();
        let sub = DMatrix::from_fn(n - 1, n - 1, |i, j| cov[(free[i], free[j])]);
        let (l, jit) = jittered_cholesky(&sub)?;
        jitter = jit;
        // Reinserting the zero root row/column keeps the factor lower triangular.
        for (i, &u) in free.iter().enumerate() {
            for (j, &v) in free.iter().enumerate().take(i + 1) {
                factor[(u, v)] = l[(i, j)];
            }
        }
    }
    Ok(GffCovariance { cov, factor, jitter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn series_parallel_and_triangle() {
        let p = graphs::path(6);
        assert!(close(effective_resistance(&p, 0, 5).unwrap(), 5.0, 1e-12));
        let par = Network::from_edges(2, [(0, 1, 1.0), (1, 0, 1.0)], 0).unwrap();
        assert!(close(effective_resistance(&par, 0, 1).unwrap(), 0.5, 1e-12));
        let tri = graphs::complete(3);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            assert!(close(effective_resistance(&tri, u, v).unwrap(), 2.0 / 3.0, 1e-12));
        }
        assert_eq!(effective_resistance(&tri, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn resistance_to_sets() {
        let star = graphs::star(4);
        assert!(close(effective_resistance_to_set(&star, 0, &[1, 2, 3, 4]).unwrap(), 0.25, 1e-12));
        let p = graphs::path(3);
        assert!(close(effective_resistance_to_set(&p, 2, &[0]).unwrap(), 2.0, 1e-12));
        assert!(close(effective_resistance_to_set(&p, 1, &[0, 2]).unwrap(), 0.5, 1e-12));
        assert!(matches!(effective_resistance_to_set(&p, 1, &[1]), Err(Error::VertexInSet { vertex: 1 })));
    }

    #[test]
    fn reductions() {
        let p = graphs::path(3);
        let r = reduce_network(&p, &[0, 2]).unwrap();
        assert!(close(r.conductance(0, 1), 0.5, 1e-12));
        // c_v preserved: the deficit sits on loops
        assert!(close(r.total_conductance(0), 1.0, 1e-12));
        assert!(close(r.self_loop(0), 0.5, 1e-12));

        let tri = graphs::complete(3);
        let r = reduce_network(&tri, &[0, 1]).unwrap();
        assert!(close(r.conductance(0, 1), 1.5, 1e-12));
        assert!(close(effective_resistance(&r, 0, 1).unwrap(), 2.0 / 3.0, 1e-12));

        let same = reduce_network(&tri, &[0, 1, 2]).unwrap();
        assert_eq!(same.edges(), tri.edges());

        assert!(reduce_network(&tri, &[1, 2]).is_err());
        assert!(reduce_network(&tri, &[0]).is_err());
    }

    #[test]
    fn hitting_times() {
        let e = graphs::path(2);
        assert!(close(hitting_time(&e, 0, 1).unwrap(), 1.0, 1e-12));
        let p = graphs::path(3);
        assert!(close(hitting_time(&p, 0, 2).unwrap(), 4.0, 1e-12));
        assert!(close(max_hitting_time(&e).unwrap(), 1.0, 1e-12));
        assert!(close(max_hitting_time(&p).unwrap(), 4.0, 1e-12));
        assert!(close(max_hitting_time(&graphs::complete(4)).unwrap(), 3.0, 1e-12));
    }

    #[test]
    fn covariance_examples() {
        let e = graphs::path(2);
        let g = gff_covariance(&e).unwrap();
        assert!(close(g.cov[(1, 1)], 1.0, 1e-12));
        let p = graphs::path(7);
        let g = gff_covariance(&p).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert!(close(g.cov[(i, j)], i.min(j) as f64, 1e-10), "{i} {j}");
            }
        }
        let back = &g.factor * g.factor.transpose();
        assert!((back - &g.cov).amax() < 1e-10);
        assert_eq!(g.jitter, 0.0);
    }

    #[test]
    fn jitter_rescues_a_singular_psd_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (l, jitter) = jittered_cholesky(&m).unwrap();
        assert!(jitter > 0.0 && jitter <= 1e-8);
        assert!(((&l * l.transpose()) - m).amax() < 1e-6);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(jittered_cholesky(&bad), Err(Error::Factorization { .. })));
    }

    #[test]
    fn harmonic_weights_on_a_path() {
        let p = graphs::path(3);
        let (w, var) = harmonic_measure(&p, 1, &[0, 2]).unwrap();
        assert_eq!(w.len(), 2);
        assert!(close(w[0].1, 0.5, 1e-12) && close(w[1].1, 0.5, 1e-12));
        assert!(close(var, 0.5, 1e-12));
    }
}
