//! Discrete analysis on `G_l`: Laplacians, energy, harmonic extension,
//! quadrature against the self-similar measure, normal derivatives and the
//! Green operator.

mod green;

pub use green::{
    dirichlet_solve, green_apply, green_matrix, green_norm_squared, green_norm_squared_dense,
    DirichletSolver,
};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{int, pow, rat, Rational, Scalar};
use crate::topology::{GraphLevel, VertexAddress};

/// Energy renormalization `r = b/(2b+1)`.
pub fn energy_ratio(b: usize) -> Rational {
    rat(b as i64, 2 * b as i64 + 1)
}

/// Laplacian scaling `r/(b+2)`.
pub fn laplacian_ratio(b: usize) -> Rational {
    rat(b as i64, (2 * b as i64 + 1) * (b as i64 + 2))
}

pub type Mat2 = [[Rational; 2]; 2];

/// Harmonic extension matrices `A_1, ..., A_{b+2}`: row `n` of `A_i` gives
/// `h(F_i q_n)` in terms of `(h(q1), h(q2))`.
pub fn harmonic_matrices(b: usize) -> Vec<Mat2> {
    let near = rat(b as i64 + 1, 2 * b as i64 + 1);
    let far = rat(b as i64, 2 * b as i64 + 1);
    let one = Rational::one();
    let zero = Rational::zero();
    let mut out = Vec::with_capacity(b + 2);
    for _ in 0..b {
        out.push([[near.clone(), far.clone()], [far.clone(), near.clone()]]);
    }
    out.push([[one.clone(), zero.clone()], [near.clone(), far.clone()]]);
    out.push([[far, near], [zero, one]]);
    out
}

/// Values of a function on the vertices of one graph, indexed by vertex id.
#[derive(Debug, Clone)]
pub struct SampledFunction<'g, S> {
    pub graph: &'g GraphLevel,
    pub values: Vec<S>,
}

impl<'g, S: Scalar> SampledFunction<'g, S> {
    pub fn new(graph: &'g GraphLevel, values: Vec<S>) -> Result<Self> {
        if values.len() != graph.n_vertices() {
            return Err(Error::InvalidArgument(format!(
                "{} values for {} vertices",
                values.len(),
                graph.n_vertices()
            )));
        }
        Ok(SampledFunction { graph, values })
    }

    pub fn from_fn(graph: &'g GraphLevel, f: impl Fn(usize) -> S) -> Self {
        let values = (0..graph.n_vertices()).map(f).collect();
        SampledFunction { graph, values }
    }

    pub fn constant(graph: &'g GraphLevel, c: S) -> Self {
        Self::from_fn(graph, |_| c.clone())
    }

    pub fn at(&self, addr: &VertexAddress) -> Result<&S> {
        Ok(&self.values[self.graph.vertex_id(addr)?])
    }

    fn same_graph(&self, other: &SampledFunction<'_, S>) -> Result<()> {
        if self.graph.b != other.graph.b || self.graph.level != other.graph.level {
            return Err(Error::GraphMismatch);
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        SampledFunction { graph: self.graph, values: self.values.iter().map(f).collect() }
    }
}

fn check_vertex(g: &GraphLevel, p: usize) -> Result<()> {
    if p >= g.n_vertices() {
        return Err(Error::UnknownVertex(format!("#{p}")));
    }
    Ok(())
}

/// `Δ_l f(p)`: multiplicity-weighted neighbour average minus `f(p)`.
pub fn graph_laplacian<S: Scalar>(f: &SampledFunction<'_, S>, p: usize) -> Result<S> {
    check_vertex(f.graph, p)?;
    let mut sum = S::zero();
    for &(q, m) in f.graph.neighbors(p) {
        sum = sum + f.values[q].clone() * S::from_rational(&int(m as i64));
    }
    let deg = S::from_rational(&int(f.graph.degree(p) as i64));
    Ok(sum / deg - f.values[p].clone())
}

/// Level-`l` approximation `2 (r/(b+2))^{-l} Δ_l f(p)` of the fractal Laplacian.
pub fn renormalized_laplacian<S: Scalar>(f: &SampledFunction<'_, S>, p: usize) -> Result<S> {
    check_vertex(f.graph, p)?;
    if f.graph.is_boundary(p) {
        return Err(Error::BoundaryVertex(f.graph.address(p).to_string()));
    }
    let scale = int(2) * pow(&laplacian_ratio(f.graph.b), -(f.graph.level as i32));
    Ok(graph_laplacian(f, p)? * S::from_rational(&scale))
}

/// `r^{-l} Σ_{p~q} mult(p,q) |f(p) - f(q)|^2`.
pub fn graph_energy<S: Scalar>(f: &SampledFunction<'_, S>) -> S {
    let mut sum = S::zero();
    for (v, w, m) in f.graph.edges() {
        let d = f.values[v].clone() - f.values[w].clone();
        sum = sum + d.clone() * d * S::from_rational(&int(m as i64));
    }
    sum * S::from_rational(&pow(&energy_ratio(f.graph.b), -(f.graph.level as i32)))
}

/// Harmonic extension of `f` to `finer`, which must be `G_{l+1}` for the same `b`.
pub fn harmonic_extend<'h, S: Scalar>(
    f: &SampledFunction<'_, S>,
    finer: &'h GraphLevel,
) -> Result<SampledFunction<'h, S>> {
    let g = f.graph;
    if finer.b != g.b || finer.level != g.level + 1 {
        return Err(Error::GraphMismatch);
    }
    let near = S::from_rational(&rat(g.b as i64 + 1, 2 * g.b as i64 + 1));
    let far = S::from_rational(&rat(g.b as i64, 2 * g.b as i64 + 1));
    let mut values = f.values.clone();
    values.resize(finer.n_vertices(), S::zero());
    let depth = g.level;
    for c in 0..finer.n_cells(depth) {
        let [x, y] = finer.cell_boundary(depth, c);
        let [j1, j2] = finer.junctions(depth, c);
        let (fx, fy) = (values[x].clone(), values[y].clone());
        values[j1] = near.clone() * fx.clone() + far.clone() * fy.clone();
        values[j2] = far.clone() * fx + near.clone() * fy;
    }
    Ok(SampledFunction { graph: finer, values })
}

/// Piecewise-harmonic function on `g` with boundary values `(h1, h2)`.
pub fn harmonic<S: Scalar>(g: &GraphLevel, h1: S, h2: S) -> SampledFunction<'_, S> {
    let near = S::from_rational(&rat(g.b as i64 + 1, 2 * g.b as i64 + 1));
    let far = S::from_rational(&rat(g.b as i64, 2 * g.b as i64 + 1));
    let mut values = vec![S::zero(); g.n_vertices()];
    values[0] = h1;
    values[1] = h2;
    for depth in 0..g.level {
        for c in 0..g.n_cells(depth) {
            let [x, y] = g.cell_boundary(depth, c);
            let [j1, j2] = g.junctions(depth, c);
            let (fx, fy) = (values[x].clone(), values[y].clone());
            values[j1] = near.clone() * fx.clone() + far.clone() * fy.clone();
            values[j2] = far.clone() * fx + near.clone() * fy;
        }
    }
    SampledFunction { graph: g, values }
}

/// `Σ_x w(x) f(x) g(x)` with the tent-function weights of `G_l`.
pub fn quadrature<S: Scalar>(f: &SampledFunction<'_, S>, g: &SampledFunction<'_, S>) -> Result<S> {
    f.same_graph(g)?;
    let weights = green::weights_in::<S>(f.graph);
    let mut sum = S::zero();
    for ((w, a), b) in weights.iter().zip(&f.values).zip(&g.values) {
        sum = sum + w.clone() * a.clone() * b.clone();
    }
    Ok(sum)
}

/// `r^{-l} (f(q) - f(x_l))` with `x_l` the inner endpoint of the level-`l` cell at `q`.
pub fn normal_derivative<S: Scalar>(f: &SampledFunction<'_, S>, q: usize) -> Result<S> {
    let g = f.graph;
    check_vertex(g, q)?;
    if !g.is_boundary(q) {
        return Err(Error::NotBoundary(g.address(q).to_string()));
    }
    if g.level == 0 {
        return Err(Error::InvalidArgument("normal derivative needs level >= 1".into()));
    }
    let (copy, slot) = if q == 0 { (g.b + 1, 1) } else { (g.b + 2, 0) };
    let cell = g.cell_index(&vec![copy; g.level]);
    let inner = g.cell_boundary(g.level, cell)[slot];
    let scale = S::from_rational(&pow(&energy_ratio(g.b), -(g.level as i32)));
    Ok((f.values[q].clone() - f.values[inner].clone()) * scale)
}

/// `f ∘ F_i` as a function on `coarse = G_{l-1}`, read from `f` on `G_l`.
pub fn pullback<'h, S: Scalar>(
    f: &SampledFunction<'_, S>,
    copy: usize,
    coarse: &'h GraphLevel,
) -> Result<SampledFunction<'h, S>> {
    let g = f.graph;
    if coarse.b != g.b || coarse.level + 1 != g.level {
        return Err(Error::GraphMismatch);
    }
    if copy == 0 || copy > g.b + 2 {
        return Err(Error::CopyIndex { index: copy, max: g.b + 2 });
    }
    let mut values = Vec::with_capacity(coarse.n_vertices());
    for addr in coarse.vertices() {
        let mut word = vec![copy];
        word.extend_from_slice(&addr.word);
        values.push(f.values[g.vertex_id(&VertexAddress::new(word, addr.anchor))?].clone());
    }
    Ok(SampledFunction { graph: coarse, values })
}
