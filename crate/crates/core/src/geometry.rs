//! Room layout, fixture grids, and point-process sampling.
//!
//! Coordinates are room-centered Cartesian on the work plane, in meters.
//! The ceiling height enters only through the channel model.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::{Error, Result};

/// Rectangular room: work-plane extent and ceiling height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomConfig {
    /// Extent along x, meters.
    pub length: f64,
    /// Extent along y, meters.
    pub width: f64,
    /// Ceiling height above the work plane, meters.
    pub height: f64,
}

impl RoomConfig {
    pub fn new(length: f64, width: f64, height: f64) -> Result<Self> {
        if !(length > 0.0 && width > 0.0 && height > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "room dimensions must be strictly positive, got {length} x {width} x {height}"
            )));
        }
        Ok(Self {
            length,
            width,
            height,
        })
    }

    /// Work-plane area, m^2.
    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0].abs() <= self.length / 2.0 && p[1].abs() <= self.width / 2.0
    }
}

/// Identical translated coverage cells tiling the room minus its edge zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageGrid {
    pub rows: usize,
    pub cols: usize,
    /// Edge-zone thickness g, meters.
    pub edge: f64,
    /// Cell half width along x (the paper's a-hat), meters.
    pub half_width: f64,
    /// Length-to-width ratio of a cell (the paper's k-hat), dimensionless.
    pub aspect: f64,
}

impl CoverageGrid {
    /// Cell extent: `2 a-hat` along x, `2 k-hat a-hat` along y.
    pub fn cell_half_extents(&self) -> [f64; 2] {
        [self.half_width, self.aspect * self.half_width]
    }
}

/// Ceiling fixtures identified by their work-plane projections.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterLayout {
    positions: Vec<[f64; 2]>,
    grid: Option<CoverageGrid>,
}

impl TransmitterLayout {
    /// Layout from explicit fixture positions, with no coverage-cell structure.
    pub fn from_positions(positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidParameter(
                "layout needs at least one fixture".into(),
            ));
        }
        Ok(Self {
            positions,
            grid: None,
        })
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Coverage-cell parameters; present only for grid layouts.
    pub fn grid(&self) -> Option<&CoverageGrid> {
        self.grid.as_ref()
    }
}

/// Builds the `rows x cols` fixture grid with edge-zone thickness `edge`.
///
/// Fixtures sit at the centers of identical translated coverage cells, so
/// `a-hat = (L/2 - g) / rows` and `k-hat = (W/2 - g) / (cols * a-hat)`.
pub fn build_grid_layout(
    room: &RoomConfig,
    rows: usize,
    cols: usize,
    edge: f64,
) -> Result<TransmitterLayout> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter(
            "grid needs at least one row and one column".into(),
        ));
    }
    if edge < 0.0 || edge >= room.length / 2.0 || edge >= room.width / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "edge zone {edge} m must satisfy 0 <= g < min(L, W)/2"
        )));
    }
    let half_width = (room.length / 2.0 - edge) / rows as f64;
    let aspect = (room.width / 2.0 - edge) / (cols as f64 * half_width);
    if half_width <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cell half width {half_width} must be positive"
        )));
    }
    if aspect < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "cell aspect {aspect} must be at least 1; swap rows/cols or shrink the grid"
        )));
    }
    let half_height = aspect * half_width;
    let x0 = -room.length / 2.0 + edge;
    let y0 = -room.width / 2.0 + edge;
    let mut positions = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            positions.push([
                x0 + half_width * (2 * i + 1) as f64,
                y0 + half_height * (2 * j + 1) as f64,
            ]);
        }
    }
    Ok(TransmitterLayout {
        positions,
        grid: Some(CoverageGrid {
            rows,
            cols,
            edge,
            half_width,
            aspect,
        }),
    })
}

/// Eavesdropper intensity over the work plane, points per m^2.
#[derive(Clone)]
pub enum IntensityField {
    Homogeneous {
        density: f64,
    },
    /// Arbitrary density sampled by thinning against `max_density`.
    Inhomogeneous {
        density: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        max_density: f64,
    },
}

impl std::fmt::Debug for IntensityField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Homogeneous { density } => {
                write!(f, "IntensityField::Homogeneous({density})")
            }
            Self::Inhomogeneous { max_density, .. } => {
                write!(f, "IntensityField::Inhomogeneous(max {max_density})")
            }
        }
    }
}

impl IntensityField {
    pub fn homogeneous(density: f64) -> Result<Self> {
        if !(density >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "intensity must be non-negative, got {density}"
            )));
        }
        Ok(Self::Homogeneous { density })
    }

    pub fn density_at(&self, x: f64, y: f64) -> f64 {
        match self {
            Self::Homogeneous { density } => *density,
            Self::Inhomogeneous { density, .. } => density(x, y),
        }
    }

    /// Mean number of points the field places in `room` (the paper's N_E),
    /// evaluated by quadrature in the inhomogeneous case.
    pub fn mean_count(&self, room: &RoomConfig) -> f64 {
        match self {
            Self::Homogeneous { density } => density * room.area(),
            Self::Inhomogeneous { density, .. } => crate::quadrature::integrate_2d(
                &|x, y| density(x, y),
                [
                    -room.length / 2.0,
                    room.length / 2.0,
                    -room.width / 2.0,
                    room.width / 2.0,
                ],
                128,
            ),
        }
    }
}

/// Draws one realization of the eavesdropper point process inside the room.
///
/// Homogeneous fields are sampled directly; inhomogeneous fields by
/// thinning a dominating homogeneous process at `max_density`. An empty
/// realization is a valid outcome.
pub fn sample_ppp<R: Rng>(
    field: &IntensityField,
    room: &RoomConfig,
    rng: &mut R,
) -> Vec<[f64; 2]> {
    let (rate, thin) = match field {
        IntensityField::Homogeneous { density } => (*density, None),
        IntensityField::Inhomogeneous {
            density,
            max_density,
        } => (*max_density, Some((density, *max_density))),
    };
    let mean = rate * room.area();
    if mean <= 0.0 {
        return Vec::new();
    }
    let count = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let x = rng.random_range(-room.length / 2.0..room.length / 2.0);
        let y = rng.random_range(-room.width / 2.0..room.width / 2.0);
        if let Some((density, max_density)) = &thin {
            if rng.random::<f64>() * max_density > density(x, y) {
                continue;
            }
        }
        points.push([x, y]);
    }
    points
}

/// Draws the UE uniformly over the coverage cell of fixture `cell_index`.
pub fn sample_ue<R: Rng>(
    layout: &TransmitterLayout,
    cell_index: usize,
    rng: &mut R,
) -> Result<[f64; 2]> {
    let grid = layout.grid.as_ref().ok_or_else(|| {
        Error::InvalidParameter("layout has no coverage-cell structure".into())
    })?;
    let center = *layout
        .positions
        .get(cell_index)
        .ok_or_else(|| Error::InvalidParameter(format!("cell index {cell_index} out of range")))?;
    let [hx, hy] = grid.cell_half_extents();
    Ok([
        center[0] + rng.random_range(-hx..hx),
        center[1] + rng.random_range(-hy..hy),
    ])
}

/// Index of the fixture closest to `p` on the work plane; ties go to the
/// lowest index.
pub fn nearest_transmitter(layout: &TransmitterLayout, p: [f64; 2]) -> usize {
    let mut best = 0;
    let mut best_d2 = f64::INFINITY;
    for (i, t) in layout.positions.iter().enumerate() {
        let d2 = (p[0] - t[0]).powi(2) + (p[1] - t[1]).powi(2);
        if d2 < best_d2 {
            best_d2 = d2;
            best = i;
        }
    }
    best
}
