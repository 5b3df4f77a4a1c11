//! Rectangular domains, their decomposition into rectangular subdomains,
//! tensor-product subdomain grids and per-subdomain time partitions.

use crate::error::GeometryError;

/// Relative tolerance used when comparing coordinates that were produced by
/// different floating point paths (e.g. `0.5 + 0.5 * k / n` versus `k / m`).
pub const COORD_TOL: f64 = 1e-12;

/// A strictly increasing list of breakpoints on a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition1D {
    breakpoints: Vec<f64>,
}

impl Partition1D {
    /// `n` equal cells on `[a, b]`. The endpoints are reproduced bitwise.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::EmptyPartition);
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(GeometryError::BadInterval { lo: a, hi: b });
        }
        let mut breakpoints: Vec<f64> = (0..=n)
            .map(|k| a + (b - a) * (k as f64) / (n as f64))
            .collect();
        breakpoints[0] = a;
        breakpoints[n] = b;
        Ok(Self { breakpoints })
    }

    pub fn from_breakpoints(breakpoints: Vec<f64>) -> Result<Self, GeometryError> {
        if breakpoints.len() < 2 {
            return Err(GeometryError::EmptyPartition);
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || breakpoints.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(GeometryError::NotIncreasing);
        }
        Ok(Self { breakpoints })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn cell(&self, k: usize) -> (f64, f64) {
        (self.breakpoints[k], self.breakpoints[k + 1])
    }

    pub fn width(&self, k: usize) -> f64 {
        self.breakpoints[k + 1] - self.breakpoints[k]
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }

    pub fn max_width(&self) -> f64 {
        self.widths().fold(0.0, f64::max)
    }

    /// Index of the cell containing `x`; points outside are clamped to the
    /// first or last cell.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.len();
        match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&x).unwrap())
        {
            Ok(i) => i.min(n - 1),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 1),
        }
    }

    /// True when every breakpoint of `coarse` is (up to [`COORD_TOL`]) a
    /// breakpoint of `self` and both span the same interval.
    pub fn refines(&self, coarse: &Partition1D) -> bool {
        let scale = (self.end() - self.start()).abs().max(1.0);
        let close = |a: f64, b: f64| (a - b).abs() <= COORD_TOL * scale;
        if !close(self.start(), coarse.start()) || !close(self.end(), coarse.end()) {
            return false;
        }
        coarse.breakpoints.iter().all(|&c| {
            let k = self.locate(c);
            close(self.breakpoints[k], c) || close(self.breakpoints[k + 1], c)
        })
    }
}

/// Sorted union of several breakpoint lists, merging points closer than
/// [`COORD_TOL`] relative to the span.
pub fn merge_breakpoints(lists: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let span = match (all.first(), all.last()) {
        (Some(a), Some(b)) => (b - a).abs().max(1.0),
        _ => return all,
    };
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for x in all {
        match out.last() {
            Some(&last) if (x - last).abs() <= COORD_TOL * span => {}
            _ => out.push(x),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    pub fn unit_square() -> Self {
        Self::new(0.0, 1.0, 0.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    fn is_valid(&self) -> bool {
        self.x0 < self.x1
            && self.y0 < self.y1
            && [self.x0, self.x1, self.y0, self.y1]
                .iter()
                .all(|v| v.is_finite())
    }
}

/// One side of a rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundarySide {
    West,
    East,
    South,
    North,
}

impl BoundarySide {
    pub const ALL: [BoundarySide; 4] = [Self::West, Self::East, Self::South, Self::North];

    /// Sign of the outward normal relative to the positive coordinate axis.
    pub fn outward_sign(self) -> f64 {
        match self {
            Self::West | Self::South => -1.0,
            Self::East | Self::North => 1.0,
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            Self::West | Self::East => Axis::Vertical,
            Self::South | Self::North => Axis::Horizontal,
        }
    }
}

/// Orientation of an interface segment. A vertical interface sits at fixed
/// `x` and has a normal along `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Vertical,
    Horizontal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainSpec {
    pub id: usize,
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
    pub time: Partition1D,
}

impl SubdomainSpec {
    pub fn new(id: usize, rect: Rect, nx: usize, ny: usize, time: Partition1D) -> Self {
        Self {
            id,
            rect,
            nx,
            ny,
            time,
        }
    }

    pub fn x_partition(&self) -> Partition1D {
        Partition1D::uniform(self.rect.x0, self.rect.x1, self.nx).expect("validated subdomain")
    }

    pub fn y_partition(&self) -> Partition1D {
        Partition1D::uniform(self.rect.y0, self.rect.y1, self.ny).expect("validated subdomain")
    }

    pub fn dx(&self) -> f64 {
        self.rect.width() / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.rect.height() / self.ny as f64
    }

    /// Largest cell diameter.
    pub fn h(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    pub fn n_steps(&self) -> usize {
        self.time.len()
    }

    /// Number of cells along a side.
    pub fn side_cells(&self, side: BoundarySide) -> usize {
        match side.axis() {
            Axis::Vertical => self.ny,
            Axis::Horizontal => self.nx,
        }
    }

    /// Breakpoints of the trace mesh along a side, in the tangential
    /// coordinate (`y` for West/East, `x` for South/North).
    pub fn side_partition(&self, side: BoundarySide) -> Partition1D {
        match side.axis() {
            Axis::Vertical => self.y_partition(),
            Axis::Horizontal => self.x_partition(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceSpec {
    pub id: usize,
    /// `(i, j)` with `i < j`.
    pub subdomains: (usize, usize),
    pub axis: Axis,
    /// The shared coordinate (`x` for vertical, `y` for horizontal interfaces).
    pub position: f64,
    /// The shared segment in the tangential coordinate.
    pub range: (f64, f64),
    /// Sign of the unit normal pointing from `Ω_i` into `Ω_j`, relative to the
    /// positive axis normal to the interface.
    pub normal_sign: f64,
}

impl InterfaceSpec {
    pub fn length(&self) -> f64 {
        self.range.1 - self.range.0
    }

    /// Unit normal pointing from `Ω_i` into `Ω_j`.
    pub fn normal(&self) -> [f64; 2] {
        match self.axis {
            Axis::Vertical => [self.normal_sign, 0.0],
            Axis::Horizontal => [0.0, self.normal_sign],
        }
    }

    /// Outward unit normal of the given subdomain on this interface.
    pub fn outward_normal(&self, subdomain: usize) -> Option<[f64; 2]> {
        let n = self.normal();
        if subdomain == self.subdomains.0 {
            Some(n)
        } else if subdomain == self.subdomains.1 {
            Some([-n[0], -n[1]])
        } else {
            None
        }
    }

    /// Which side of `subdomain` this interface lies on.
    pub fn side_of(&self, subdomain: usize) -> Option<BoundarySide> {
        let n = self.outward_normal(subdomain)?;
        Some(match self.axis {
            Axis::Vertical if n[0] > 0.0 => BoundarySide::East,
            Axis::Vertical => BoundarySide::West,
            Axis::Horizontal if n[1] > 0.0 => BoundarySide::North,
            Axis::Horizontal => BoundarySide::South,
        })
    }

    /// Physical point on the interface at tangential coordinate `s`.
    pub fn point(&self, s: f64) -> (f64, f64) {
        match self.axis {
            Axis::Vertical => (self.position, s),
            Axis::Horizontal => (s, self.position),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub domain: Rect,
    pub final_time: f64,
    pub subdomains: Vec<SubdomainSpec>,
    pub interfaces: Vec<InterfaceSpec>,
}

impl Decomposition {
    pub fn n_subdomains(&self) -> usize {
        self.subdomains.len()
    }

    /// Interfaces touching subdomain `i`, in interface order.
    pub fn interfaces_of(&self, i: usize) -> impl Iterator<Item = &InterfaceSpec> + '_ {
        self.interfaces
            .iter()
            .filter(move |f| f.subdomains.0 == i || f.subdomains.1 == i)
    }

    /// Largest spatial mesh size over all subdomains.
    pub fn h(&self) -> f64 {
        self.subdomains
            .iter()
            .map(|s| s.dx().max(s.dy()))
            .fold(0.0, f64::max)
    }

    /// Largest time step over all subdomains.
    pub fn dt(&self) -> f64 {
        self.subdomains
            .iter()
            .map(|s| s.time.max_width())
            .fold(0.0, f64::max)
    }

    /// True if all subdomains share one time partition (bitwise).
    pub fn has_common_time_grid(&self) -> bool {
        self.subdomains.windows(2).all(|w| w[0].time == w[1].time)
    }
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= COORD_TOL * scale.max(1.0)
}

/// Validates that the subdomain rectangles tile `domain` and detects the
/// interfaces. The interface normal always points from the lower-indexed
/// subdomain into the higher-indexed one.
pub fn build_decomposition(
    domain: Rect,
    final_time: f64,
    subdomains: Vec<SubdomainSpec>,
) -> Result<Decomposition, GeometryError> {
    if !domain.is_valid() {
        return Err(GeometryError::BadInterval {
            lo: domain.x0,
            hi: domain.x1,
        });
    }
    if !(final_time > 0.0) || !final_time.is_finite() {
        return Err(GeometryError::BadFinalTime(final_time));
    }
    if subdomains.is_empty() {
        return Err(GeometryError::NoSubdomains);
    }
    let scale = domain.width().max(domain.height());
    for (idx, s) in subdomains.iter().enumerate() {
        if s.id != idx {
            return Err(GeometryError::BadSubdomainId {
                expected: idx,
                found: s.id,
            });
        }
        if s.nx == 0 || s.ny == 0 {
            return Err(GeometryError::EmptyGrid(idx));
        }
        if !s.rect.is_valid() {
            return Err(GeometryError::BadInterval {
                lo: s.rect.x0,
                hi: s.rect.x1,
            });
        }
        let r = &s.rect;
        let inside = r.x0 >= domain.x0 - COORD_TOL * scale
            && r.x1 <= domain.x1 + COORD_TOL * scale
            && r.y0 >= domain.y0 - COORD_TOL * scale
            && r.y1 <= domain.y1 + COORD_TOL * scale;
        if !inside {
            return Err(GeometryError::OutsideDomain(idx));
        }
        if s.time.start() != 0.0 || !close(s.time.end(), final_time, final_time) {
            return Err(GeometryError::TimeSpan { subdomain: idx });
        }
    }

    for i in 0..subdomains.len() {
        for j in (i + 1)..subdomains.len() {
            let (a, b) = (&subdomains[i].rect, &subdomains[j].rect);
            let ox = a.x1.min(b.x1) - a.x0.max(b.x0);
            let oy = a.y1.min(b.y1) - a.y0.max(b.y0);
            if ox > COORD_TOL * scale && oy > COORD_TOL * scale {
                return Err(GeometryError::Overlap(i, j));
            }
        }
    }

    let area: f64 = subdomains.iter().map(|s| s.rect.area()).sum();
    if (area - domain.area()).abs() > 1e-14 * domain.area().max(1.0) * subdomains.len() as f64 {
        return Err(GeometryError::Gap {
            covered: area,
            expected: domain.area(),
        });
    }

    let mut interfaces = Vec::new();
    for i in 0..subdomains.len() {
        for j in (i + 1)..subdomains.len() {
            if let Some(f) = shared_edge(i, &subdomains[i].rect, j, &subdomains[j].rect, scale)? {
                interfaces.push(InterfaceSpec {
                    id: interfaces.len(),
                    ..f
                });
            }
        }
    }

    Ok(Decomposition {
        domain,
        final_time,
        subdomains,
        interfaces,
    })
}

fn shared_edge(
    i: usize,
    a: &Rect,
    j: usize,
    b: &Rect,
    scale: f64,
) -> Result<Option<InterfaceSpec>, GeometryError> {
    let make = |axis, position, lo: f64, hi: f64, sign| InterfaceSpec {
        id: 0,
        subdomains: (i, j),
        axis,
        position,
        range: (lo, hi),
        normal_sign: sign,
    };
    // Vertical contact.
    for (xa, xb, sign) in [(a.x1, b.x0, 1.0), (a.x0, b.x1, -1.0)] {
        if close(xa, xb, scale) {
            let lo = a.y0.max(b.y0);
            let hi = a.y1.min(b.y1);
            if hi - lo > COORD_TOL * scale {
                if !(close(a.y0, b.y0, scale) && close(a.y1, b.y1, scale)) {
                    return Err(GeometryError::NonConforming(i, j));
                }
                return Ok(Some(make(Axis::Vertical, xa, a.y0, a.y1, sign)));
            }
        }
    }
    for (ya, yb, sign) in [(a.y1, b.y0, 1.0), (a.y0, b.y1, -1.0)] {
        if close(ya, yb, scale) {
            let lo = a.x0.max(b.x0);
            let hi = a.x1.min(b.x1);
            if hi - lo > COORD_TOL * scale {
                if !(close(a.x0, b.x0, scale) && close(a.x1, b.x1, scale)) {
                    return Err(GeometryError::NonConforming(i, j));
                }
                return Ok(Some(make(Axis::Horizontal, ya, a.x0, a.x1, sign)));
            }
        }
    }
    Ok(None)
}

/// `nx × ny` equal rectangular blocks of `domain`, numbered row by row from
/// the lower-left corner. `cells(ix, iy)` gives the spatial cells per side
/// and `steps(ix, iy)` the number of uniform time steps of each block.
pub fn block_decomposition(
    domain: Rect,
    final_time: f64,
    blocks_x: usize,
    blocks_y: usize,
    cells: impl Fn(usize, usize) -> usize,
    steps: impl Fn(usize, usize) -> usize,
) -> Result<Decomposition, GeometryError> {
    let xs = Partition1D::uniform(domain.x0, domain.x1, blocks_x)?;
    let ys = Partition1D::uniform(domain.y0, domain.y1, blocks_y)?;
    let mut specs = Vec::with_capacity(blocks_x * blocks_y);
    for iy in 0..blocks_y {
        for ix in 0..blocks_x {
            let (x0, x1) = xs.cell(ix);
            let (y0, y1) = ys.cell(iy);
            let n = cells(ix, iy);
            let time = Partition1D::uniform(0.0, final_time, steps(ix, iy))?;
            specs.push(SubdomainSpec::new(
                specs.len(),
                Rect::new(x0, x1, y0, y1),
                n,
                n,
                time,
            ));
        }
    }
    build_decomposition(domain, final_time, specs)
}

/// Per-subdomain counts `(n_i, N_i)` of the checkerboard refinement schedule
/// on the four quadrants of the unit square.
pub fn example1_counts(level: u32) -> Result<[(usize, usize); 4], GeometryError> {
    if level > 4 {
        return Err(GeometryError::LevelOutOfRange(level));
    }
    let f = 1usize << level;
    Ok([
        (3 * f, 3 * f),
        (2 * f, 2 * f),
        (4 * f, 4 * f),
        (3 * f, 3 * f),
    ])
}

/// Final time of the checkerboard convergence test.
pub const EXAMPLE1_FINAL_TIME: f64 = 0.5;

/// Four quadrants of `(0,1)²` with the checkerboard non-matching schedule,
/// `T = 0.5`. Subdomains are numbered lower-left, lower-right, upper-left,
/// upper-right.
pub fn refine_example1(level: u32) -> Result<(Decomposition, [(usize, usize); 4]), GeometryError> {
    let counts = example1_counts(level)?;
    let decomposition = block_decomposition(
        Rect::unit_square(),
        EXAMPLE1_FINAL_TIME,
        2,
        2,
        |ix, iy| counts[iy * 2 + ix].0,
        |ix, iy| counts[iy * 2 + ix].1,
    )?;
    Ok((decomposition, counts))
}

/// Interval pieces of a subdomain's trace mesh along an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceFace {
    /// Face interval in the tangential coordinate.
    pub interval: (f64, f64),
    /// Position of the face along the side (0-based, increasing coordinate).
    pub index: usize,
    /// Index of the cell owning the face, in row-major `j * nx + i` order.
    pub cell: usize,
}

/// The 1D trace mesh of `subdomain` along `interface`, ordered by increasing
/// tangential coordinate.
pub fn face_overlaps(
    decomposition: &Decomposition,
    interface: &InterfaceSpec,
    subdomain: usize,
) -> Result<Vec<TraceFace>, GeometryError> {
    let side = interface
        .side_of(subdomain)
        .ok_or(GeometryError::NotOnInterface {
            subdomain,
            interface: interface.id,
        })?;
    let spec = &decomposition.subdomains[subdomain];
    let part = spec.side_partition(side);
    let (nx, ny) = (spec.nx, spec.ny);
    Ok((0..part.len())
        .map(|k| {
            let cell = match side {
                BoundarySide::West => k * nx,
                BoundarySide::East => k * nx + nx - 1,
                BoundarySide::South => k,
                BoundarySide::North => (ny - 1) * nx + k,
            };
            TraceFace {
                interval: part.cell(k),
                index: k,
                cell,
            }
        })
        .collect())
}
