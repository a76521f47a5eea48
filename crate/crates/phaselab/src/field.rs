//! Cell-centered grids, boundary conditions, field states, and discrete operators.
//!
//! Fields live at cell centers of a uniform grid on (0, Lx) or (0, Lx) × (0, Ly).
//! Boundary conditions close the stencils through one layer of ghost cells:
//!
//! * order parameter φ — always homogeneous Neumann (reflection ghost),
//! * temperature — per-face, either a constant outward-normal gradient ∂T/∂n = q
//!   (ghost = interior + q·h) or a Dirichlet value (ghost = 2·T_b − interior).
//!
//! The same ghost coefficients drive the explicit operators here and the implicit
//! solves in [`crate::pde`], so diagnostics and stepping see one discretization.
//!
//! Gradient-square densities use cell-centered second-order central differences.
//! With this choice the discrete energies drift at O(dt + h²) in conservative runs,
//! which is the advertised behavior of the time steppers.

use crate::{Error, Result};

/// Boundary faces in storage order. 1D grids use only `Left` and `Right`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Left,
    Right,
    Bottom,
    Top,
}

impl Face {
    pub const ALL: [Face; 4] = [Face::Left, Face::Right, Face::Bottom, Face::Top];

    fn index(self) -> usize {
        match self {
            Face::Left => 0,
            Face::Right => 1,
            Face::Bottom => 2,
            Face::Top => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::Left => "left",
            Face::Right => "right",
            Face::Bottom => "bottom",
            Face::Top => "top",
        }
    }
}

/// Temperature condition on one boundary face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceBc {
    /// Constant outward-normal temperature gradient ∂T/∂n = q.
    Flux(f64),
    /// Constant boundary temperature.
    Dirichlet(f64),
}

/// Temperature boundary conditions on all faces (φ is always homogeneous Neumann).
///
/// The canonical construction puts a constant heat flux `q_b` on the faces belonging
/// to Γ and a constant Dirichlet value `T_b` on the rest; [`BoundarySpec::with_face`]
/// can override individual faces (e.g. insulated side walls).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    faces: [FaceBc; 4],
}

impl BoundarySpec {
    /// Flux `q_b` on the listed Γ faces, Dirichlet `T_b` everywhere else.
    pub fn mixed(gamma_faces: &[Face], q_b: f64, t_b: f64) -> Self {
        let mut faces = [FaceBc::Dirichlet(t_b); 4];
        for f in gamma_faces {
            faces[f.index()] = FaceBc::Flux(q_b);
        }
        BoundarySpec { faces }
    }

    /// Insulated box: zero flux on every face.
    pub fn no_flux() -> Self {
        BoundarySpec {
            faces: [FaceBc::Flux(0.0); 4],
        }
    }

    /// Override a single face.
    pub fn with_face(mut self, face: Face, bc: FaceBc) -> Self {
        self.faces[face.index()] = bc;
        self
    }

    pub fn face(&self, face: Face) -> FaceBc {
        self.faces[face.index()]
    }

    /// Faces carrying a flux condition (the Γ part of the boundary).
    pub fn gamma_faces(&self, dim: usize) -> Vec<Face> {
        self.relevant_faces(dim)
            .iter()
            .copied()
            .filter(|f| matches!(self.face(*f), FaceBc::Flux(_)))
            .collect()
    }

    fn relevant_faces(&self, dim: usize) -> &'static [Face] {
        if dim == 1 {
            &[Face::Left, Face::Right]
        } else {
            &Face::ALL
        }
    }

    /// The same boundary layout with all prescribed values set to zero. The
    /// shifted temperature T − T̃ satisfies exactly these homogeneous conditions,
    /// which is what the dissipation-identity diagnostics measure against.
    pub fn homogenized(&self) -> BoundarySpec {
        let mut out = self.clone();
        for f in Face::ALL {
            out.faces[f.index()] = match out.faces[f.index()] {
                FaceBc::Flux(_) => FaceBc::Flux(0.0),
                FaceBc::Dirichlet(_) => FaceBc::Dirichlet(0.0),
            };
        }
        out
    }

    /// True when every relevant face is a flux face (Γ = ∂Ω); the lifting is then
    /// only determined up to a constant and requires zero net flux.
    pub fn is_pure_neumann(&self, dim: usize) -> bool {
        self.relevant_faces(dim)
            .iter()
            .all(|f| matches!(self.face(*f), FaceBc::Flux(_)))
    }

    /// Net heat flux through the boundary, ∮ ∂T/∂n ds, for compatibility checks.
    pub fn net_flux(&self, grid: &Grid) -> f64 {
        let mut total = 0.0;
        for f in self.relevant_faces(grid.dim) {
            if let FaceBc::Flux(q) = self.face(*f) {
                total += q * grid.face_measure(*f);
            }
        }
        total
    }
}

/// Uniform cell-centered grid on (0, Lx) (1D) or (0, Lx) × (0, Ly) (2D).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// Axis extents (domain lengths); the origin is always 0.
    pub len_x: f64,
    pub len_y: f64,
}

impl Grid {
    pub fn line(nx: usize, len_x: f64) -> Result<Grid> {
        if nx < 8 {
            return Err(Error::domain(format!("grid needs ≥ 8 cells per axis, got nx = {nx}")));
        }
        if !(len_x > 0.0) {
            return Err(Error::domain(format!("domain length must be positive, got {len_x}")));
        }
        Ok(Grid {
            dim: 1,
            nx,
            ny: 1,
            dx: len_x / nx as f64,
            dy: 1.0,
            len_x,
            len_y: 1.0,
        })
    }

    pub fn rect(nx: usize, ny: usize, len_x: f64, len_y: f64) -> Result<Grid> {
        if nx < 8 || ny < 8 {
            return Err(Error::domain(format!(
                "grid needs ≥ 8 cells per axis, got nx = {nx}, ny = {ny}"
            )));
        }
        if !(len_x > 0.0) || !(len_y > 0.0) {
            return Err(Error::domain(format!(
                "domain lengths must be positive, got {len_x} × {len_y}"
            )));
        }
        Ok(Grid {
            dim: 2,
            nx,
            ny,
            dx: len_x / nx as f64,
            dy: len_y / ny as f64,
            len_x,
            len_y,
        })
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Quadrature weight of one cell (midpoint rule).
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.dx
        } else {
            self.dx * self.dy
        }
    }

    /// Measure of one boundary face (1 in 1D, edge length in 2D).
    pub fn face_measure(&self, face: Face) -> f64 {
        if self.dim == 1 {
            1.0
        } else {
            match face {
                Face::Left | Face::Right => self.len_y,
                Face::Bottom | Face::Top => self.len_x,
            }
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dy
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Midpoint-rule integral of a cell-valued function.
    pub fn integrate(&self, cell_values: &[f64]) -> f64 {
        debug_assert_eq!(cell_values.len(), self.cell_count());
        cell_values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Discrete L² norm, (∫ f²)^{1/2}.
    pub fn l2_norm(&self, cell_values: &[f64]) -> f64 {
        (cell_values.iter().map(|v| v * v).sum::<f64>() * self.cell_volume()).sqrt()
    }
}

/// Ghost value expressed as `coeff · interior + offset`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GhostRule {
    pub coeff: f64,
    pub offset: f64,
}

impl GhostRule {
    /// Reflection ghost for homogeneous Neumann data (used by φ on every face).
    pub(crate) fn reflect() -> Self {
        GhostRule { coeff: 1.0, offset: 0.0 }
    }

    /// Temperature ghost for one face with spacing `h` across that face.
    pub(crate) fn for_temp(bc: FaceBc, h: f64) -> Self {
        match bc {
            // (ghost − interior)/h = q along the outward normal.
            FaceBc::Flux(q) => GhostRule { coeff: 1.0, offset: q * h },
            // Linear extrapolation through the boundary value.
            FaceBc::Dirichlet(tb) => GhostRule { coeff: -1.0, offset: 2.0 * tb },
        }
    }

    #[inline]
    pub(crate) fn value(&self, interior: f64) -> f64 {
        self.coeff * interior + self.offset
    }
}

/// Per-face ghost rules for one scalar field on one grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GhostRules {
    pub rules: [GhostRule; 4],
}

impl GhostRules {
    pub(crate) fn phi() -> Self {
        GhostRules { rules: [GhostRule::reflect(); 4] }
    }

    pub(crate) fn temp(grid: &Grid, bc: &BoundarySpec) -> Self {
        GhostRules {
            rules: [
                GhostRule::for_temp(bc.face(Face::Left), grid.dx),
                GhostRule::for_temp(bc.face(Face::Right), grid.dx),
                GhostRule::for_temp(bc.face(Face::Bottom), grid.dy),
                GhostRule::for_temp(bc.face(Face::Top), grid.dy),
            ],
        }
    }

    #[inline]
    pub(crate) fn rule(&self, face: Face) -> GhostRule {
        self.rules[face.index()]
    }
}

/// Second-order 3-point (1D) / 5-point (2D) Laplacian with ghost closure.
pub(crate) fn laplacian_with(grid: &Grid, ghosts: &GhostRules, f: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.nx, grid.ny);
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let inv_dy2 = 1.0 / (grid.dy * grid.dy);
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.idx(i, j);
            let fc = f[c];
            let west = if i > 0 { f[c - 1] } else { ghosts.rule(Face::Left).value(fc) };
            let east = if i + 1 < nx { f[c + 1] } else { ghosts.rule(Face::Right).value(fc) };
            let mut lap = (west - 2.0 * fc + east) * inv_dx2;
            if grid.dim == 2 {
                let south = if j > 0 { f[c - nx] } else { ghosts.rule(Face::Bottom).value(fc) };
                let north = if j + 1 < ny { f[c + nx] } else { ghosts.rule(Face::Top).value(fc) };
                lap += (south - 2.0 * fc + north) * inv_dy2;
            }
            out[c] = lap;
        }
    }
}

/// Linear part of the ghost-closed Laplacian: ghost offsets dropped, only the
/// `coeff`·interior dependence kept. This is the operator applied inside
/// implicit solves; the offsets move to the right-hand side via
/// [`ghost_offset_contributions`].
pub(crate) fn laplacian_linear_with(grid: &Grid, ghosts: &GhostRules, f: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.nx, grid.ny);
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let inv_dy2 = 1.0 / (grid.dy * grid.dy);
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.idx(i, j);
            let fc = f[c];
            let west = if i > 0 { f[c - 1] } else { ghosts.rule(Face::Left).coeff * fc };
            let east = if i + 1 < nx { f[c + 1] } else { ghosts.rule(Face::Right).coeff * fc };
            let mut lap = (west - 2.0 * fc + east) * inv_dx2;
            if grid.dim == 2 {
                let south = if j > 0 { f[c - nx] } else { ghosts.rule(Face::Bottom).coeff * fc };
                let north = if j + 1 < ny { f[c + nx] } else { ghosts.rule(Face::Top).coeff * fc };
                lap += (south - 2.0 * fc + north) * inv_dy2;
            }
            out[c] = lap;
        }
    }
}

/// Affine part of the ghost-closed Laplacian: per-cell sum of ghost offsets over
/// the squared spacings, so that `laplacian = laplacian_linear + contributions`.
pub(crate) fn ghost_offset_contributions(grid: &Grid, ghosts: &GhostRules) -> Vec<f64> {
    let mut out = vec![0.0; grid.cell_count()];
    let inv_dx2 = 1.0 / (grid.dx * grid.dx);
    let inv_dy2 = 1.0 / (grid.dy * grid.dy);
    for j in 0..grid.ny {
        let left = grid.idx(0, j);
        let right = grid.idx(grid.nx - 1, j);
        out[left] += ghosts.rule(Face::Left).offset * inv_dx2;
        out[right] += ghosts.rule(Face::Right).offset * inv_dx2;
    }
    if grid.dim == 2 {
        for i in 0..grid.nx {
            let bottom = grid.idx(i, 0);
            let top = grid.idx(i, grid.ny - 1);
            out[bottom] += ghosts.rule(Face::Bottom).offset * inv_dy2;
            out[top] += ghosts.rule(Face::Top).offset * inv_dy2;
        }
    }
    out
}

/// Laplacian of the order parameter (homogeneous Neumann on every face).
pub fn phi_laplacian(grid: &Grid, phi: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.cell_count()];
    laplacian_with(grid, &GhostRules::phi(), phi, &mut out);
    out
}

/// Laplacian of the temperature under the given boundary conditions.
pub fn temp_laplacian(grid: &Grid, bc: &BoundarySpec, temp: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; grid.cell_count()];
    laplacian_with(grid, &GhostRules::temp(grid, bc), temp, &mut out);
    out
}

/// Cell-centered |∇f|² via central differences with ghost closure.
pub(crate) fn grad_sq_with(grid: &Grid, ghosts: &GhostRules, f: &[f64]) -> Vec<f64> {
    let (nx, ny) = (grid.nx, grid.ny);
    let inv_2dx = 0.5 / grid.dx;
    let inv_2dy = 0.5 / grid.dy;
    let mut out = vec![0.0; grid.cell_count()];
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.idx(i, j);
            let fc = f[c];
            let west = if i > 0 { f[c - 1] } else { ghosts.rule(Face::Left).value(fc) };
            let east = if i + 1 < nx { f[c + 1] } else { ghosts.rule(Face::Right).value(fc) };
            let gx = (east - west) * inv_2dx;
            let mut g2 = gx * gx;
            if grid.dim == 2 {
                let south = if j > 0 { f[c - nx] } else { ghosts.rule(Face::Bottom).value(fc) };
                let north = if j + 1 < ny { f[c + nx] } else { ghosts.rule(Face::Top).value(fc) };
                let gy = (north - south) * inv_2dy;
                g2 += gy * gy;
            }
            out[c] = g2;
        }
    }
    out
}

/// |∇φ|² density (homogeneous Neumann ghosts).
pub fn phi_grad_sq(grid: &Grid, phi: &[f64]) -> Vec<f64> {
    grad_sq_with(grid, &GhostRules::phi(), phi)
}

/// |∇T|² density under the given boundary conditions.
pub fn temp_grad_sq(grid: &Grid, bc: &BoundarySpec, temp: &[f64]) -> Vec<f64> {
    grad_sq_with(grid, &GhostRules::temp(grid, bc), temp)
}

/// Discrete boundary integral ∮ ∂T/∂n ds: prescribed q on flux faces, one-sided
/// ghost-based gradients on Dirichlet faces.
pub fn boundary_normal_flux(grid: &Grid, bc: &BoundarySpec, temp: &[f64]) -> f64 {
    let ghosts = GhostRules::temp(grid, bc);
    let mut total = 0.0;
    let faces: &[Face] = if grid.dim == 1 {
        &[Face::Left, Face::Right]
    } else {
        &Face::ALL
    };
    for &face in faces {
        let (h, measure_per_cell, cells): (f64, f64, Vec<usize>) = match face {
            Face::Left => (grid.dx, grid.dy, (0..grid.ny).map(|j| grid.idx(0, j)).collect()),
            Face::Right => (
                grid.dx,
                grid.dy,
                (0..grid.ny).map(|j| grid.idx(grid.nx - 1, j)).collect(),
            ),
            Face::Bottom => (grid.dy, grid.dx, (0..grid.nx).map(|i| grid.idx(i, 0)).collect()),
            Face::Top => (
                grid.dy,
                grid.dx,
                (0..grid.nx).map(|i| grid.idx(i, grid.ny - 1)).collect(),
            ),
        };
        let measure_per_cell = if grid.dim == 1 { 1.0 } else { measure_per_cell };
        let rule = ghosts.rule(face);
        for c in cells {
            // Outward-normal derivative from the ghost: (ghost − interior)/h.
            let dn = (rule.value(temp[c]) - temp[c]) / h;
            total += dn * measure_per_cell;
        }
    }
    total
}

/// Order parameter and temperature on one grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub phi: Vec<f64>,
    pub temp: Vec<f64>,
    pub time: f64,
}

impl FieldState {
    pub fn new(phi: Vec<f64>, temp: Vec<f64>, time: f64) -> Self {
        FieldState { phi, temp, time }
    }

    /// Spatially uniform state.
    pub fn uniform(grid: &Grid, phi: f64, temp: f64) -> Self {
        let n = grid.cell_count();
        FieldState {
            phi: vec![phi; n],
            temp: vec![temp; n],
            time: 0.0,
        }
    }

    /// Build from closures of the cell-center coordinates.
    pub fn from_fn(
        grid: &Grid,
        mut phi: impl FnMut(f64, f64) -> f64,
        mut temp: impl FnMut(f64, f64) -> f64,
    ) -> Self {
        let mut p = Vec::with_capacity(grid.cell_count());
        let mut t = Vec::with_capacity(grid.cell_count());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = (grid.x(i), grid.y(j));
                p.push(phi(x, y));
                t.push(temp(x, y));
            }
        }
        FieldState { phi: p, temp: t, time: 0.0 }
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        let n = grid.cell_count();
        if self.phi.len() != n || self.temp.len() != n {
            return Err(Error::domain(format!(
                "field shapes ({}, {}) do not match the grid ({} cells)",
                self.phi.len(),
                self.temp.len(),
                n
            )));
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.phi.iter().chain(self.temp.iter()).all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_small_counts_and_bad_extents() {
        assert!(Grid::line(7, 1.0).is_err());
        assert!(Grid::line(8, 0.0).is_err());
        assert!(Grid::rect(16, 7, 1.0, 1.0).is_err());
        let g = Grid::line(8, 2.0).unwrap();
        assert_eq!(g.dx, 0.25);
        assert_eq!(g.cell_count(), 8);
        assert_eq!(g.cell_volume(), 0.25);
    }

    #[test]
    fn cell_centers_tile_the_domain() {
        let g = Grid::line(10, 1.0).unwrap();
        assert!((g.x(0) - 0.05).abs() < 1e-15);
        assert!((g.x(9) - 0.95).abs() < 1e-15);
        let ones = vec![1.0; 10];
        assert!((g.integrate(&ones) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_laplacian_annihilates_constants_everywhere() {
        let g = Grid::line(16, 1.0).unwrap();
        let f = vec![3.25; 16];
        for v in phi_laplacian(&g, &f) {
            assert_eq!(v, 0.0);
        }
        let g2 = Grid::rect(8, 8, 1.0, 2.0).unwrap();
        let f2 = vec![-1.5; 64];
        for v in phi_laplacian(&g2, &f2) {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn laplacian_of_neumann_cosine_converges_at_second_order() {
        // f = cos(πx) satisfies f'(0) = f'(1) = 0, so the reflection ghosts are
        // consistent and the discrete Laplacian should converge to −π²cos(πx).
        let mut errs = Vec::new();
        for n in [32usize, 64, 128] {
            let g = Grid::line(n, 1.0).unwrap();
            let f: Vec<f64> = (0..n).map(|i| (std::f64::consts::PI * g.x(i)).cos()).collect();
            let lap = phi_laplacian(&g, &f);
            let pi2 = std::f64::consts::PI * std::f64::consts::PI;
            let err = (0..n)
                .map(|i| (lap[i] + pi2 * (std::f64::consts::PI * g.x(i)).cos()).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        let r1 = errs[0] / errs[1];
        let r2 = errs[1] / errs[2];
        assert!(r1 > 3.5 && r1 < 4.5, "refinement ratio {r1} not ≈ 4");
        assert!(r2 > 3.5 && r2 < 4.5, "refinement ratio {r2} not ≈ 4");
    }

    #[test]
    fn temp_ghosts_reproduce_linear_mixed_profile_exactly() {
        // T(x) = T_b + q_b(1−x) satisfies ∂T/∂n = q_b at x = 0 (outward normal −x)
        // and T(1) = T_b; both ghost rules are exact on linear data, so the discrete
        // Laplacian must vanish identically, boundary cells included.
        let (q_b, t_b) = (0.7, -0.3);
        let g = Grid::line(12, 1.0).unwrap();
        let bc = BoundarySpec::mixed(&[Face::Left], q_b, t_b);
        let t: Vec<f64> = (0..12).map(|i| t_b + q_b * (1.0 - g.x(i))).collect();
        for (i, v) in temp_laplacian(&g, &bc, &t).iter().enumerate() {
            assert!(v.abs() < 1e-10, "Laplacian at cell {i} = {v}, expected 0");
        }
        // And the boundary flux integral sees q_b in and q_b out: ∮∂T/∂n = q_b + (−q_b).
        let net = boundary_normal_flux(&g, &bc, &t);
        assert!(net.abs() < 1e-10, "net flux {net} on the linear profile");
    }

    #[test]
    fn boundary_flux_splits_prescribed_and_dirichlet_faces() {
        let g = Grid::line(10, 1.0).unwrap();
        let bc = BoundarySpec::mixed(&[Face::Left], 2.0, 0.0);
        // Constant temperature: Dirichlet side sees 2(T_b − T)/dx, flux side reports q.
        let t = vec![1.0; 10];
        let net = boundary_normal_flux(&g, &bc, &t);
        let expected = 2.0 + 2.0 * (0.0 - 1.0) / g.dx;
        assert!((net - expected).abs() < 1e-12, "net {net} vs expected {expected}");
    }

    #[test]
    fn gradient_square_matches_linear_slope_in_the_interior() {
        let g = Grid::line(16, 1.0).unwrap();
        let f: Vec<f64> = (0..16).map(|i| 3.0 * g.x(i)).collect();
        let g2 = phi_grad_sq(&g, &f);
        for v in &g2[1..15] {
            assert!((v - 9.0).abs() < 1e-12, "interior |∇f|² = {v}, expected 9");
        }
    }

    #[test]
    fn boundary_spec_classifies_faces() {
        let bc = BoundarySpec::mixed(&[Face::Left], 1.0, 0.0);
        assert_eq!(bc.gamma_faces(1), vec![Face::Left]);
        assert!(!bc.is_pure_neumann(1));
        assert!(BoundarySpec::no_flux().is_pure_neumann(2));
        let with_insulation = BoundarySpec::mixed(&[Face::Left], 1.0, 0.0)
            .with_face(Face::Top, FaceBc::Flux(0.0));
        assert_eq!(with_insulation.gamma_faces(2).len(), 2);
    }

    #[test]
    fn net_flux_accounts_for_face_measures() {
        let g = Grid::rect(8, 8, 2.0, 3.0).unwrap();
        let bc = BoundarySpec::no_flux()
            .with_face(Face::Left, FaceBc::Flux(1.0))
            .with_face(Face::Bottom, FaceBc::Flux(-0.5));
        // left face measure = len_y = 3, bottom face measure = len_x = 2.
        assert!((bc.net_flux(&g) - (3.0 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn field_state_shape_checks() {
        let g = Grid::line(8, 1.0).unwrap();
        let s = FieldState::uniform(&g, 1.0, 0.0);
        assert!(s.check_shape(&g).is_ok());
        let bad = FieldState::new(vec![0.0; 7], vec![0.0; 8], 0.0);
        assert!(bad.check_shape(&g).is_err());
        assert!(s.all_finite());
        let mut nan = s.clone();
        nan.temp[3] = f64::NAN;
        assert!(!nan.all_finite());
    }
}
