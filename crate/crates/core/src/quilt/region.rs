//! Axis-aligned regions on the `L x L` time-frequency torus.
//!
//! A region is a union of half-open rectangles `[x0, x1) x [w0, w1)`.
//! Intervals that wrap past `L` are split, so the stored rectangles are
//! always plain (at most two segments per axis per logical rectangle).

use crate::error::{QuiltError, Result};
use crate::signal::TFPoint;

/// Half-open rectangle `[x0, x1) x [w0, w1)` with `0 <= lo < hi <= L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x0: usize,
    pub x1: usize,
    pub w0: usize,
    pub w1: usize,
}

impl Rect {
    pub fn contains(&self, p: &TFPoint) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.omega >= self.w0 && p.omega < self.w1
    }

    pub fn area(&self) -> usize {
        (self.x1 - self.x0) * (self.w1 - self.w0)
    }
}

/// A circular interval on `Z_L`, given by start and length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CircInterval {
    pub start: usize,
    pub len: usize,
}

impl CircInterval {
    pub fn full(l: usize) -> Self {
        Self { start: 0, len: l }
    }

    /// Grows the interval by `delta` on both sides, saturating at the
    /// whole circle.
    pub fn dilate(&self, delta: usize, l: usize) -> CircInterval {
        if self.len + 2 * delta >= l {
            return CircInterval::full(l);
        }
        CircInterval {
            start: (self.start + l - (delta % l)) % l,
            len: self.len + 2 * delta,
        }
    }

    pub fn intersects(&self, other: &CircInterval, l: usize) -> bool {
        if self.len == 0 || other.len == 0 {
            return false;
        }
        if self.len == l || other.len == l {
            return true;
        }
        // Distance from other.start to self.start along the circle.
        let d = (other.start + l - self.start) % l;
        d < self.len || (l - d) % l < other.len
    }

    /// Splits into one or two linear `[lo, hi)` segments with `hi <= L`.
    pub fn segments(&self, l: usize) -> Vec<(usize, usize)> {
        if self.len == 0 {
            return vec![];
        }
        if self.len >= l {
            return vec![(0, l)];
        }
        let end = self.start + self.len;
        if end <= l {
            vec![(self.start, end)]
        } else {
            vec![(self.start, l), (0, end - l)]
        }
    }
}

/// A region of the time-frequency torus: a set of rectangles plus the
/// region index it carries inside a partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    id: usize,
    l: usize,
    rects: Vec<Rect>,
}

impl Region {
    /// Region from circular intervals `(x_start, x_len) x (w_start, w_len)`.
    /// Wrapping intervals are split into up to two segments per axis.
    pub fn from_spans(
        id: usize,
        l: usize,
        x_start: usize,
        x_len: usize,
        w_start: usize,
        w_len: usize,
    ) -> Result<Self> {
        if x_len > l || w_len > l {
            return Err(QuiltError::Config(format!(
                "region span exceeds the torus size {l}"
            )));
        }
        let xs = CircInterval {
            start: x_start % l,
            len: x_len,
        };
        let ws = CircInterval {
            start: w_start % l,
            len: w_len,
        };
        let mut rects = Vec::new();
        for (x0, x1) in xs.segments(l) {
            for (w0, w1) in ws.segments(l) {
                rects.push(Rect { x0, x1, w0, w1 });
            }
        }
        Ok(Self { id, l, rects })
    }

    /// The whole `L x L` plane.
    pub fn full_plane(id: usize, l: usize) -> Self {
        Self {
            id,
            l,
            rects: vec![Rect {
                x0: 0,
                x1: l,
                w0: 0,
                w1: l,
            }],
        }
    }

    /// A region with no points.
    pub fn empty(id: usize, l: usize) -> Self {
        Self {
            id,
            l,
            rects: Vec::new(),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    /// Same geometry under a new region index.
    pub fn with_id(&self, id: usize) -> Region {
        Region {
            id,
            l: self.l,
            rects: self.rects.clone(),
        }
    }

    pub fn torus_len(&self) -> usize {
        self.l
    }

    pub fn rectangles(&self) -> &[Rect] {
        &self.rects
    }

    pub fn is_empty(&self) -> bool {
        self.rects.iter().all(|r| r.area() == 0)
    }

    pub fn contains(&self, p: &TFPoint) -> bool {
        self.rects.iter().any(|r| r.contains(p))
    }

    /// Number of grid points in the region (counted once each).
    pub fn point_count(&self) -> usize {
        let mut count = 0usize;
        for x in 0..self.l {
            for w in 0..self.l {
                if self.contains(&TFPoint::new(x, w, self.l)) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Grows every rectangle by `delta` on all four sides, modulo `L`.
    /// Dilation distributes over unions, so enlarging the pieces of a
    /// wrapped rectangle matches enlarging the original.
    pub fn enlarge(&self, delta: usize) -> Region {
        if delta == 0 {
            return self.clone();
        }
        let l = self.l;
        let mut rects = Vec::new();
        for r in &self.rects {
            if r.area() == 0 {
                continue;
            }
            let xs = CircInterval {
                start: r.x0,
                len: r.x1 - r.x0,
            }
            .dilate(delta, l);
            let ws = CircInterval {
                start: r.w0,
                len: r.w1 - r.w0,
            }
            .dilate(delta, l);
            for (x0, x1) in xs.segments(l) {
                for (w0, w1) in ws.segments(l) {
                    rects.push(Rect { x0, x1, w0, w1 });
                }
            }
        }
        Region {
            id: self.id,
            l,
            rects,
        }
    }
}
