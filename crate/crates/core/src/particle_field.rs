//! Lagrangian particle set on a 1D domain.
//!
//! Particles are kept sorted by position. Two boundary kinds are supported:
//! a periodic domain, and a fixed-state domain whose ends are bordered by a
//! layer of ghost particles frozen at prescribed left/right states.

use std::io::Write;

use crate::error::{Error, Result};
use crate::gas_model::PrimitiveState;

/// Default neighborhood radius in units of the initial spacing.
pub const DEFAULT_H_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Periodic,
    FixedState {
        left: PrimitiveState,
        right: PrimitiveState,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub x: f64,
    pub state: PrimitiveState,
}

/// Gap thresholds for particle insertion and merging, in units of the
/// initial spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManagementRule {
    pub gap_max: f64,
    pub gap_min: f64,
}

impl Default for ManagementRule {
    fn default() -> Self {
        Self {
            gap_max: 1.5,
            gap_min: 0.25,
        }
    }
}

/// Compressed-row neighbor lists. Indices at or beyond the particle count
/// refer to ghost particles, in the order returned by
/// [`ParticleField::ghosts`].
#[derive(Debug, Clone, Default)]
pub struct NeighborTable {
    pub start: Vec<usize>,
    pub index: Vec<usize>,
    pub offset: Vec<f64>,
}

impl NeighborTable {
    pub fn len(&self) -> usize {
        self.start.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.start[i]..self.start[i + 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleField {
    particles: Vec<Particle>,
    x_min: f64,
    x_max: f64,
    boundary: Boundary,
    dx0: f64,
    h: f64,
}

impl ParticleField {
    /// `n` equally spaced particles on `(x_min, x_min + length)`, at cell
    /// centres `x_min + (i + 1/2) dx0`.
    pub fn init_uniform(x_min: f64, length: f64, n: usize, state0: PrimitiveState, boundary: Boundary) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidConfig(format!("at least 4 particles required, got {n}")));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "domain length must be positive, got {length}"
            )));
        }
        let dx0 = length / n as f64;
        let particles = (0..n)
            .map(|i| Particle {
                x: x_min + (i as f64 + 0.5) * dx0,
                state: state0,
            })
            .collect();
        Ok(Self {
            particles,
            x_min,
            x_max: x_min + length,
            boundary,
            dx0,
            h: DEFAULT_H_FACTOR * dx0,
        })
    }

    /// Builds a field from explicit particles; they are sorted by position.
    pub fn from_particles(
        mut particles: Vec<Particle>,
        x_min: f64,
        x_max: f64,
        boundary: Boundary,
        dx0: f64,
        h: f64,
    ) -> Result<Self> {
        if !(x_max > x_min) || !(dx0 > 0.0) || !(h > 0.0) {
            return Err(Error::InvalidConfig("invalid domain, spacing or radius".into()));
        }
        particles.sort_by(|a, b| a.x.total_cmp(&b.x));
        Ok(Self {
            particles,
            x_min,
            x_max,
            boundary,
            dx0,
            h,
        })
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn particles_mut(&mut self) -> &mut [Particle] {
        &mut self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn dx0(&self) -> f64 {
        self.dx0
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn is_sorted(&self) -> bool {
        self.particles.windows(2).all(|w| w[0].x < w[1].x)
    }

    /// Signed displacement `to - from`, using the minimum image on a
    /// periodic domain.
    #[inline]
    pub fn displacement(&self, from: f64, to: f64) -> f64 {
        let d = to - from;
        match self.boundary {
            Boundary::Periodic => {
                let l = self.length();
                d - l * (d / l).round()
            }
            Boundary::FixedState { .. } => d,
        }
    }

    /// Ghost particles bordering a fixed-state domain (left layer first,
    /// ordered outward). Empty for periodic domains.
    pub fn ghosts(&self) -> Vec<Particle> {
        match self.boundary {
            Boundary::Periodic => Vec::new(),
            Boundary::FixedState { left, right } => {
                let layers = (self.h / self.dx0).ceil() as usize;
                let mut g = Vec::with_capacity(2 * layers);
                for k in 0..layers {
                    g.push(Particle {
                        x: self.x_min - (k as f64 + 0.5) * self.dx0,
                        state: left,
                    });
                }
                for k in 0..layers {
                    g.push(Particle {
                        x: self.x_max + (k as f64 + 0.5) * self.dx0,
                        state: right,
                    });
                }
                g
            }
        }
    }

    /// All particles within `h` of `x`, nearest first. Ghosts are not
    /// included.
    pub fn neighbors(&self, x: f64) -> Result<Vec<usize>> {
        let mut found = self.scan_from(x, self.lower_bound(x), None);
        finish_neighbors(x, &mut found)
    }

    /// Neighbors of particle `i`, excluding `i` itself.
    pub fn neighbors_of(&self, i: usize) -> Result<Vec<usize>> {
        let x = self.particles[i].x;
        let mut found = self.scan_from(x, i, Some(i));
        finish_neighbors(x, &mut found)
    }

    fn lower_bound(&self, x: f64) -> usize {
        self.particles.partition_point(|p| p.x < x)
    }

    /// Walks outward from index `pivot` in both directions (wrapping on
    /// periodic domains) collecting particles within `h`.
    fn scan_from(&self, x: f64, pivot: usize, skip: Option<usize>) -> Vec<(f64, usize)> {
        let n = self.particles.len();
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let periodic = matches!(self.boundary, Boundary::Periodic);
        let mut visited = 0usize;
        // right, starting at pivot
        let mut j = pivot;
        let mut right_end = None;
        loop {
            if j >= n {
                if !periodic {
                    break;
                }
                j -= n;
            }
            if visited == n {
                break;
            }
            let d = self.displacement(x, self.particles[j].x);
            if d.abs() > self.h {
                break;
            }
            if Some(j) != skip {
                out.push((d, j));
            }
            visited += 1;
            right_end = Some(j);
            j += 1;
        }
        // left, starting below pivot
        let mut j = pivot as isize - 1;
        while visited < n {
            if j < 0 {
                if !periodic {
                    break;
                }
                j += n as isize;
            }
            let ju = j as usize;
            if Some(ju) == right_end && periodic {
                break;
            }
            let d = self.displacement(x, self.particles[ju].x);
            if d.abs() > self.h {
                break;
            }
            if Some(ju) != skip {
                out.push((d, ju));
            }
            visited += 1;
            j -= 1;
        }
        out
    }

    /// Neighbor lists (with ghosts) for every particle.
    pub fn neighbor_table(&self) -> Result<NeighborTable> {
        let n = self.particles.len();
        let ghosts = self.ghosts();
        let mut table = NeighborTable {
            start: Vec::with_capacity(n + 1),
            index: Vec::with_capacity(n * 8),
            offset: Vec::with_capacity(n * 8),
        };
        table.start.push(0);
        for i in 0..n {
            let x = self.particles[i].x;
            let before = table.index.len();
            for (d, j) in self.scan_from(x, i, Some(i)) {
                table.index.push(j);
                table.offset.push(d);
            }
            for (g, ghost) in ghosts.iter().enumerate() {
                let d = ghost.x - x;
                if d.abs() <= self.h {
                    table.index.push(n + g);
                    table.offset.push(d);
                }
            }
            let found = table.index.len() - before;
            if found < 2 {
                return Err(Error::InsufficientNeighborhood { x, found });
            }
            table.start.push(table.index.len());
        }
        Ok(table)
    }

    /// Gap between consecutive particles `i` and `i + 1` (wrapping to the
    /// first particle on periodic domains).
    pub fn gap_after(&self, i: usize) -> f64 {
        let n = self.particles.len();
        if i + 1 < n {
            self.particles[i + 1].x - self.particles[i].x
        } else {
            self.particles[0].x + self.length() - self.particles[i].x
        }
    }

    pub fn min_spacing(&self) -> f64 {
        let n = self.particles.len();
        let interior = self
            .particles
            .windows(2)
            .map(|w| w[1].x - w[0].x)
            .fold(f64::INFINITY, f64::min);
        match self.boundary {
            Boundary::Periodic if n > 1 => interior.min(self.gap_after(n - 1)),
            _ => interior,
        }
    }

    /// Inserts particles into gaps wider than `gap_max dx0` and merges pairs
    /// closer than `gap_min dx0`, repeating until neither rule fires.
    /// Returns `(added, removed)`.
    pub fn manage_particles(&mut self, rule: &ManagementRule) -> Result<(usize, usize)> {
        let (mut added, mut removed) = (0, 0);
        let min_gap = rule.gap_min * self.dx0;
        let max_gap = rule.gap_max * self.dx0;
        loop {
            let merged = self.merge_pass(min_gap);
            let inserted = self.insert_pass(max_gap);
            removed += 2 * merged;
            added += merged + inserted;
            if self.particles.len() < 4 {
                return Err(Error::DegenerateField(format!(
                    "{} particle(s) left after management",
                    self.particles.len()
                )));
            }
            if merged == 0 && inserted == 0 {
                break;
            }
        }
        Ok((added, removed))
    }

    fn merge_pass(&mut self, min_gap: f64) -> usize {
        let mut merged = 0;
        let mut out: Vec<Particle> = Vec::with_capacity(self.particles.len());
        for &p in &self.particles {
            match out.last_mut() {
                Some(last) if p.x - last.x < min_gap => {
                    *last = Particle {
                        x: 0.5 * (last.x + p.x),
                        state: last.state.midpoint(&p.state),
                    };
                    merged += 1;
                }
                _ => out.push(p),
            }
        }
        if matches!(self.boundary, Boundary::Periodic) && out.len() > 1 {
            let l = self.length();
            let first = out[0];
            let last = out[out.len() - 1];
            let gap = first.x + l - last.x;
            if gap < min_gap {
                out.pop();
                out.remove(0);
                let x = self.wrap(last.x + 0.5 * gap);
                let p = Particle {
                    x,
                    state: last.state.midpoint(&first.state),
                };
                let at = out.partition_point(|q| q.x < x);
                out.insert(at, p);
                merged += 1;
            }
        }
        self.particles = out;
        merged
    }

    fn insert_pass(&mut self, max_gap: f64) -> usize {
        let mut inserted = 0;
        let mut out: Vec<Particle> = Vec::with_capacity(self.particles.len() + 4);
        for &p in &self.particles {
            if let Some(last) = out.last() {
                if p.x - last.x > max_gap {
                    let mid = Particle {
                        x: 0.5 * (last.x + p.x),
                        state: last.state.midpoint(&p.state),
                    };
                    out.push(mid);
                    inserted += 1;
                }
            }
            out.push(p);
        }
        if matches!(self.boundary, Boundary::Periodic) && out.len() > 1 {
            let l = self.length();
            let first = out[0];
            let last = out[out.len() - 1];
            let gap = first.x + l - last.x;
            if gap > max_gap {
                let x = self.wrap(last.x + 0.5 * gap);
                let p = Particle {
                    x,
                    state: last.state.midpoint(&first.state),
                };
                let at = out.partition_point(|q| q.x < x);
                out.insert(at, p);
                inserted += 1;
            }
        }
        self.particles = out;
        inserted
    }

    fn wrap(&self, x: f64) -> f64 {
        let l = self.length();
        let w = self.x_min + (x - self.x_min).rem_euclid(l);
        // rem_euclid can round up to exactly l
        if w >= self.x_max {
            self.x_min
        } else {
            w
        }
    }

    /// Wraps positions (periodic) or deletes escaped particles and refills
    /// the boundary strips with fixed-state particles. Returns
    /// `(added, removed)`.
    pub fn apply_boundary(&mut self) -> (usize, usize) {
        match self.boundary {
            Boundary::Periodic => {
                let outside = self.particles.iter().any(|p| p.x < self.x_min || p.x >= self.x_max);
                if outside {
                    for i in 0..self.particles.len() {
                        self.particles[i].x = self.wrap(self.particles[i].x);
                    }
                    self.particles.sort_by(|a, b| a.x.total_cmp(&b.x));
                }
                (0, 0)
            }
            Boundary::FixedState { left, right } => {
                let before = self.particles.len();
                let (lo, hi) = (self.x_min, self.x_max);
                self.particles.retain(|p| p.x >= lo && p.x <= hi);
                let removed = before - self.particles.len();
                let mut added = 0;
                if self.particles.is_empty() {
                    self.particles.push(Particle {
                        x: lo + 0.5 * self.dx0,
                        state: left,
                    });
                    added += 1;
                }
                let mut front = Vec::new();
                let mut x = self.particles[0].x;
                while x - lo > self.dx0 {
                    x -= self.dx0;
                    front.push(Particle { x, state: left });
                }
                added += front.len();
                if !front.is_empty() {
                    front.reverse();
                    front.append(&mut self.particles);
                    self.particles = front;
                }
                let mut x = self.particles[self.particles.len() - 1].x;
                while hi - x > self.dx0 {
                    x += self.dx0;
                    self.particles.push(Particle { x, state: right });
                    added += 1;
                }
                (added, removed)
            }
        }
    }

    /// One CSV row per particle: `step,x,rho,u,T`.
    pub fn write_snapshot_csv<W: Write>(&self, w: &mut W, step: u64, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(w, "step,x,rho,u,T")?;
        }
        for p in &self.particles {
            writeln!(w, "{step},{:e},{:e},{:e},{:e}", p.x, p.state.rho, p.state.u, p.state.t)?;
        }
        Ok(())
    }
}

fn finish_neighbors(x: f64, found: &mut [(f64, usize)]) -> Result<Vec<usize>> {
    if found.len() < 2 {
        return Err(Error::InsufficientNeighborhood { x, found: found.len() });
    }
    found.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(a.1.cmp(&b.1)));
    Ok(found.iter().map(|&(_, j)| j).collect())
}
