use serde::{Deserialize, Serialize};

pub type Site = u16;

/// Compass directions, clockwise from north.
pub const DIRECTIONS: [(i32, i32); 8] = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionSet {
    Orthogonal,
    Diagonal,
    All,
}

impl DirectionSet {
    pub fn directions(self) -> &'static [usize] {
        match self {
            DirectionSet::Orthogonal => &[0, 2, 4, 6],
            DirectionSet::Diagonal => &[1, 3, 5, 7],
            DirectionSet::All => &[0, 1, 2, 3, 4, 5, 6, 7],
        }
    }
}

/// A player's route for race games.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Track {
    pub sites: Vec<Site>,
    /// Whether the track ends in a bear-off point.
    pub exits: bool,
}

impl Track {
    pub fn position(&self, site: Site) -> Option<usize> {
        self.sites.iter().position(|&s| s == site)
    }
}

/// Sites of a rectangular grid with square cells, their neighbourhoods and
/// any per-player tracks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardGraph {
    pub rows: usize,
    pub columns: usize,
    /// Per site, the neighbour in each of the eight [`DIRECTIONS`].
    steps: Vec<[Option<Site>; 8]>,
    pub tracks: [Option<Track>; 2],
}

impl BoardGraph {
    pub fn grid(rows: usize, columns: usize) -> Self {
        let mut steps = Vec::with_capacity(rows * columns);
        for r in 0..rows as i32 {
            for c in 0..columns as i32 {
                let mut out = [None; 8];
                for (d, (dr, dc)) in DIRECTIONS.iter().enumerate() {
                    let (nr, nc) = (r + dr, c + dc);
                    if nr >= 0 && nc >= 0 && (nr as usize) < rows && (nc as usize) < columns {
                        out[d] = Some((nr as usize * columns + nc as usize) as Site);
                    }
                }
                steps.push(out);
            }
        }
        BoardGraph {
            rows,
            columns,
            steps,
            tracks: [None, None],
        }
    }

    pub fn site_count(&self) -> usize {
        self.rows * self.columns
    }

    #[inline]
    pub fn step(&self, site: Site, direction: usize) -> Option<Site> {
        self.steps[site as usize][direction]
    }

    pub fn orthogonal(&self, site: Site) -> Vec<Site> {
        self.neighbours(site, DirectionSet::Orthogonal)
    }

    pub fn diagonal(&self, site: Site) -> Vec<Site> {
        self.neighbours(site, DirectionSet::Diagonal)
    }

    pub fn neighbours(&self, site: Site, set: DirectionSet) -> Vec<Site> {
        set.directions().iter().filter_map(|&d| self.step(site, d)).collect()
    }

    pub fn adjacent(&self, a: Site, b: Site) -> bool {
        self.steps[a as usize].contains(&Some(b))
    }

    /// `(row, column)` of a site.
    pub fn coordinates(&self, site: Site) -> (usize, usize) {
        (site as usize / self.columns, site as usize % self.columns)
    }
}
