//! The four random gluing models and the topology of one glued sample.
//!
//! An instance is a set of polygons whose sides are listed clockwise. Matched
//! sides carry dart labels `0..N` and are glued in pairs by a matching; free
//! sides are boundary edges. In the primed models the free sides are extra
//! edges inserted at corners, and corner `k` is the corner where dart `k`
//! starts, between `α⁻¹(k)` and `k`.
//!
//! Gluing dart `k` to `β(k)` reverses orientation, so the start of `k` meets
//! the start of the side following `β(k)`. On the matched darts alone this
//! is `γ = α∘β`, and the vertex stars of the closed surface are the cycles of
//! `γ`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::dsu::DisjointSets;
use crate::perm::{self, Matching, PermError, Permutation, RotationShape};

const FREE: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("n must be positive")]
    ZeroSize,
    #[error("polygons need at least 3 sides, got t = {0}")]
    TooFewSides(usize),
    #[error("{model}: {darts} matched darts cannot be paired (must be even)")]
    OddDarts { model: ModelKind, darts: usize },
    #[error("{model}: m = {m} exceeds the maximum {max}")]
    TooManyBoundary {
        model: ModelKind,
        m: usize,
        max: usize,
    },
    #[error("unknown model `{0}` (expected t, tprime, s or sprime)")]
    UnknownModel(String),
    #[error("placement is not an increasing {expected}-subset of 0..{range}")]
    BadPlacement { expected: usize, range: usize },
    #[error("matching covers {got} darts, model needs {expected}")]
    MatchingSize { got: usize, expected: usize },
    #[error("gamma shortcut needs a primed model or m = 0")]
    ShortcutInapplicable,
    #[error("corner label {0} out of range")]
    CornerOutOfRange(usize),
    #[error(transparent)]
    Perm(#[from] PermError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// n t-gons, the first m of them carrying one extra boundary side.
    T,
    /// n t-gons with boundary edges inserted at m of the t·n corners.
    TPrime,
    /// One polygon with n ordinary and m boundary sides in random positions.
    S,
    /// One n-gon with boundary edges inserted at m of its corners.
    SPrime,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::T,
        ModelKind::TPrime,
        ModelKind::S,
        ModelKind::SPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::T => "t",
            ModelKind::TPrime => "tprime",
            ModelKind::S => "s",
            ModelKind::SPrime => "sprime",
        }
    }

    pub fn is_primed(self) -> bool {
        matches!(self, ModelKind::TPrime | ModelKind::SPrime)
    }

    pub fn is_single_polygon(self) -> bool {
        matches!(self, ModelKind::S | ModelKind::SPrime)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "t" => Ok(ModelKind::T),
            "tprime" | "t'" => Ok(ModelKind::TPrime),
            "s" => Ok(ModelKind::S),
            "sprime" | "s'" => Ok(ModelKind::SPrime),
            _ => Err(ModelError::UnknownModel(s.to_string())),
        }
    }
}

/// Validated model parameters. `t` only matters for the triangle-family models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelParams {
    kind: ModelKind,
    n: usize,
    m: usize,
    t: usize,
}

impl ModelParams {
    pub fn new(kind: ModelKind, n: usize, m: usize, t: usize) -> Result<Self, ModelError> {
        if n == 0 {
            return Err(ModelError::ZeroSize);
        }
        if t < 3 {
            return Err(ModelError::TooFewSides(t));
        }
        let params = ModelParams { kind, n, m, t };
        let darts = params.matched_darts();
        if darts % 2 == 1 {
            return Err(ModelError::OddDarts { model: kind, darts });
        }
        let max = match kind {
            ModelKind::T => n,
            ModelKind::TPrime => t * n,
            ModelKind::S => usize::MAX,
            ModelKind::SPrime => n,
        };
        if m > max {
            return Err(ModelError::TooManyBoundary {
                model: kind,
                m,
                max,
            });
        }
        Ok(params)
    }

    /// Triangle-based or single-polygon model with the default `t = 3`.
    pub fn with_triangles(kind: ModelKind, n: usize, m: usize) -> Result<Self, ModelError> {
        Self::new(kind, n, m, 3)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// N: number of glued darts.
    pub fn matched_darts(&self) -> usize {
        match self.kind {
            ModelKind::T | ModelKind::TPrime => self.t * self.n,
            ModelKind::S | ModelKind::SPrime => self.n,
        }
    }

    pub fn polygon_count(&self) -> usize {
        if self.kind.is_single_polygon() {
            1
        } else {
            self.n
        }
    }

    /// Size of the ground set the boundary placement is an m-subset of,
    /// or `None` for the T model, whose placement is canonical.
    pub fn placement_range(&self) -> Option<usize> {
        match self.kind {
            ModelKind::T => None,
            ModelKind::TPrime | ModelKind::SPrime => Some(self.matched_darts()),
            ModelKind::S => Some(self.n + self.m),
        }
    }

    pub fn rotation_shape(&self) -> RotationShape {
        if self.kind.is_single_polygon() {
            RotationShape::Single { sides: self.n }
        } else {
            RotationShape::Polygons {
                count: self.n,
                sides: self.t,
            }
        }
    }
}

/// One glued surface: polygons, the gluing matching and the boundary placement.
#[derive(Clone, Debug)]
pub struct GluingInstance {
    params: ModelParams,
    matching: Matching,
    /// Free side positions (T, S); empty for primed models.
    free_darts: Vec<usize>,
    /// Corner labels carrying an inserted boundary edge (T′, S′).
    insertions: Vec<usize>,
    /// Next side clockwise, over all sides.
    rotation: Permutation,
    side_dart: Vec<usize>,
    dart_side: Vec<usize>,
    side_polygon: Vec<usize>,
    /// External tag of each free side: its position (T, S) or corner (T′, S′).
    free_tags: Vec<(usize, usize)>,
}

impl GluingInstance {
    /// Assembles an instance from a matching and a boundary placement.
    ///
    /// `placement` is the increasing list of corner labels (T′, S′), of free
    /// positions among the n+m sides (S), or empty (T).
    pub fn from_parts(
        params: ModelParams,
        matching: Matching,
        placement: &[usize],
    ) -> Result<Self, ModelError> {
        let darts = params.matched_darts();
        if matching.len() != darts {
            return Err(ModelError::MatchingSize {
                got: matching.len(),
                expected: darts,
            });
        }
        let (expected, range) = match params.placement_range() {
            Some(range) => (params.m(), range),
            None => (0, 0),
        };
        let increasing = placement.windows(2).all(|w| w[0] < w[1]);
        if placement.len() != expected || !increasing || placement.iter().any(|&p| p >= range) {
            return Err(ModelError::BadPlacement { expected, range });
        }

        let total = darts + params.m();
        let mut side_dart = Vec::with_capacity(total);
        let mut side_polygon = Vec::with_capacity(total);
        let mut polygon_starts = Vec::with_capacity(params.polygon_count() + 1);
        let mut free_tags = Vec::with_capacity(params.m());
        let mut free_darts = Vec::new();
        let mut insertions = Vec::new();

        match params.kind() {
            ModelKind::T => {
                let t = params.t();
                for poly in 0..params.n() {
                    polygon_starts.push(side_dart.len());
                    for d in poly * t..(poly + 1) * t {
                        side_dart.push(d);
                        side_polygon.push(poly);
                    }
                    if poly < params.m() {
                        free_tags.push((side_dart.len(), side_dart.len()));
                        free_darts.push(side_dart.len());
                        side_dart.push(FREE);
                        side_polygon.push(poly);
                    }
                }
            }
            ModelKind::S => {
                polygon_starts.push(0);
                let mut free = placement.iter().peekable();
                let mut next_dart = 0;
                for pos in 0..total {
                    if free.peek() == Some(&&pos) {
                        free.next();
                        free_tags.push((pos, pos));
                        free_darts.push(pos);
                        side_dart.push(FREE);
                    } else {
                        side_dart.push(next_dart);
                        next_dart += 1;
                    }
                    side_polygon.push(0);
                }
            }
            ModelKind::TPrime | ModelKind::SPrime => {
                let per_polygon = if params.kind() == ModelKind::SPrime {
                    darts
                } else {
                    params.t()
                };
                let mut corners = placement.iter().peekable();
                for d in 0..darts {
                    let poly = d / per_polygon;
                    if d % per_polygon == 0 {
                        polygon_starts.push(side_dart.len());
                    }
                    if corners.peek() == Some(&&d) {
                        corners.next();
                        free_tags.push((side_dart.len(), d));
                        side_dart.push(FREE);
                        side_polygon.push(poly);
                    }
                    side_dart.push(d);
                    side_polygon.push(poly);
                }
                insertions = placement.to_vec();
            }
        }
        polygon_starts.push(total);
        debug_assert_eq!(side_dart.len(), total);

        let mut rotation = vec![0; total];
        for w in polygon_starts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            for s in lo..hi {
                rotation[s] = if s + 1 == hi { lo } else { s + 1 };
            }
        }
        let mut dart_side = vec![0; darts];
        for (s, &d) in side_dart.iter().enumerate() {
            if d != FREE {
                dart_side[d] = s;
            }
        }

        Ok(GluingInstance {
            params,
            matching,
            free_darts,
            insertions,
            rotation: Permutation::from_images(rotation)?,
            side_dart,
            dart_side,
            side_polygon,
            free_tags,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    /// Rotation over all sides, matched and free.
    pub fn rotation(&self) -> &Permutation {
        &self.rotation
    }

    pub fn free_darts(&self) -> &[usize] {
        &self.free_darts
    }

    pub fn insertions(&self) -> &[usize] {
        &self.insertions
    }

    pub fn matched_darts(&self) -> usize {
        self.matching.len()
    }

    pub fn side_count(&self) -> usize {
        self.side_dart.len()
    }

    /// Side glued to side `s`, or `None` for a free side.
    #[inline]
    fn glued_side(&self, s: usize) -> Option<usize> {
        match self.side_dart[s] {
            FREE => None,
            d => Some(self.dart_side[self.matching.partner(d)]),
        }
    }

    /// `γ = α∘β` on the matched darts.
    pub fn gamma(&self) -> Result<Permutation, ModelError> {
        if !self.params.kind().is_primed() && self.params.m() > 0 {
            return Err(ModelError::ShortcutInapplicable);
        }
        let alpha = perm::canonical_rotation(self.params.rotation_shape())?;
        Ok(alpha.compose(&self.matching.to_permutation())?)
    }

    /// Follows each boundary circuit from free side to free side.
    pub fn boundary_walk(&self) -> BoundaryTrace {
        let mut free_index = vec![FREE; self.side_count()];
        for (i, &(side, _)) in self.free_tags.iter().enumerate() {
            free_index[side] = i;
        }
        let mut visited = vec![false; self.free_tags.len()];
        let mut cycles = Vec::new();
        let mut boundary_vertices = 0;
        for (start, &(start_side, _)) in self.free_tags.iter().enumerate() {
            if visited[start] {
                continue;
            }
            let mut circuit = Vec::new();
            let mut side = start_side;
            loop {
                let i = free_index[side];
                visited[i] = true;
                circuit.push(self.free_tags[i].1);
                // Head of this boundary edge: walk the corners of one vertex
                // until the next free side starts there.
                let mut next = self.rotation.image(side);
                while let Some(across) = self.glued_side(next) {
                    next = self.rotation.image(across);
                }
                boundary_vertices += 1;
                side = next;
                if side == start_side {
                    break;
                }
            }
            cycles.push(circuit);
        }
        BoundaryTrace {
            cycles,
            total_boundary_vertices: boundary_vertices,
        }
    }

    /// Vertex classes by union-find over corners (one per side, where the
    /// side starts). Returns `(internal, boundary)` counts.
    pub fn vertex_classes(&self) -> VertexClasses {
        let total = self.side_count();
        let mut sets = DisjointSets::new(total);
        for s in 0..total {
            if let Some(across) = self.glued_side(s) {
                sets.union(s, self.rotation.image(across));
            }
        }
        let mut on_boundary = vec![false; total];
        let mut boundary = 0;
        for &(side, _) in &self.free_tags {
            for corner in [side, self.rotation.image(side)] {
                let root = sets.find(corner);
                if !on_boundary[root] {
                    on_boundary[root] = true;
                    boundary += 1;
                }
            }
        }
        VertexClasses {
            internal: sets.count() - boundary,
            boundary,
        }
    }

    /// Connected components of the polygon graph under the gluing.
    pub fn connected_components(&self) -> usize {
        if self.params.kind().is_single_polygon() {
            return 1;
        }
        let mut sets = DisjointSets::new(self.params.polygon_count());
        for (a, b) in self.matching.pairs() {
            sets.union(
                self.side_polygon[self.dart_side[a]],
                self.side_polygon[self.dart_side[b]],
            );
        }
        sets.count()
    }

    /// Topological summary. Primed models read B and I off `γ`; the others
    /// walk the boundary and union the corners.
    pub fn summarize(&self) -> SurfaceSummary {
        if self.params.kind().is_primed() {
            let gamma = self.gamma().expect("primed models always admit gamma");
            let counts = boundary_shortcut(&gamma, &self.insertions)
                .expect("insertions are validated corner labels");
            self.assemble(counts.boundary, counts.internal, self.params.m())
        } else {
            self.summarize_by_walk()
        }
    }

    /// Summary through the generic boundary walk and corner union-find,
    /// valid for every model.
    pub fn summarize_by_walk(&self) -> SurfaceSummary {
        let trace = self.boundary_walk();
        let classes = self.vertex_classes();
        self.assemble(trace.cycles.len(), classes.internal, classes.boundary)
    }

    fn assemble(&self, b: usize, internal: usize, boundary_vertices: usize) -> SurfaceSummary {
        let faces = self.params.polygon_count() as i64;
        let edges = (self.matched_darts() / 2 + self.params.m()) as i64;
        let vertices = (internal + boundary_vertices) as i64;
        let chi = faces - edges + vertices;
        let components = self.connected_components();
        let twice_genus = 2 * components as i64 - b as i64 - chi;
        assert!(
            twice_genus >= 0 && twice_genus % 2 == 0,
            "Euler characteristic {chi} inconsistent with {components} components and {b} boundary circles"
        );
        SurfaceSummary {
            b,
            i: internal,
            genus: (twice_genus / 2) as usize,
            chi,
            components,
            connected: components == 1,
            faces,
            edges,
            vertices,
        }
    }
}

/// Samples one instance: a uniform matching, then a uniform boundary placement.
pub fn build_instance<R: Rng + ?Sized>(
    params: ModelParams,
    rng: &mut R,
) -> Result<GluingInstance, ModelError> {
    let matching = perm::sample_matching(params.matched_darts(), rng)?;
    let placement = match params.placement_range() {
        Some(range) => {
            let mut chosen = index::sample(rng, range, params.m()).into_vec();
            chosen.sort_unstable();
            chosen
        }
        None => Vec::new(),
    };
    GluingInstance::from_parts(params, matching, &placement)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleSplit {
    pub boundary: usize,
    pub internal: usize,
}

/// Counts `γ`-cycles meeting the insertion corners (boundary components)
/// and those avoiding them (internal vertices).
pub fn boundary_shortcut(
    gamma: &Permutation,
    insertions: &[usize],
) -> Result<CycleSplit, ModelError> {
    let n = gamma.len();
    let mut marked = vec![false; n];
    for &c in insertions {
        if c >= n {
            return Err(ModelError::CornerOutOfRange(c));
        }
        marked[c] = true;
    }
    let mut seen = vec![false; n];
    let mut split = CycleSplit {
        boundary: 0,
        internal: 0,
    };
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut hit = false;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            hit |= marked[k];
            k = gamma.image(k);
        }
        if hit {
            split.boundary += 1;
        } else {
            split.internal += 1;
        }
    }
    Ok(split)
}

/// Boundary circuits, each listed as the free sides (or insertion corners)
/// met in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryTrace {
    pub cycles: Vec<Vec<usize>>,
    pub total_boundary_vertices: usize,
}

impl BoundaryTrace {
    pub fn count(&self) -> usize {
        self.cycles.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexClasses {
    pub internal: usize,
    pub boundary: usize,
}

/// Topology of one sample. `genus` is summed over components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SurfaceSummary {
    pub b: usize,
    pub i: usize,
    pub genus: usize,
    pub chi: i64,
    pub components: usize,
    pub connected: bool,
    pub faces: i64,
    pub edges: i64,
    pub vertices: i64,
}

impl SurfaceSummary {
    /// `chi == 2·components − 2·genus − B`.
    pub fn euler_identity_holds(&self) -> bool {
        self.chi == self.faces - self.edges + self.vertices
            && self.chi == 2 * self.components as i64 - 2 * self.genus as i64 - self.b as i64
    }
}
