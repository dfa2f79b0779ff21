//! Sub-pixel boundary tracing at the 0.5 level of an indicator image.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{BinaryMask, Point};

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    points: Vec<Point>,
    /// Positive signed area in `(row, col)` coordinates.
    counterclockwise: bool,
}

impl Contour {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::Degenerate(format!(
                "contour needs at least 3 points, got {}",
                points.len()
            )));
        }
        let counterclockwise = signed_area(&points) > 0.0;
        Ok(Contour {
            points,
            counterclockwise,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.counterclockwise
    }

    /// Length of the closed polyline.
    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| distance(self.points[i], self.points[(i + 1) % n]))
            .sum()
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len() as f64;
        let s = self
            .points
            .iter()
            .fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
        [s[0] / n, s[1] / n]
    }

    pub fn reversed(&self) -> Contour {
        let mut points = self.points.clone();
        points.reverse();
        Contour {
            points,
            counterclockwise: !self.counterclockwise,
        }
    }

    /// Same polygon starting from vertex `offset`.
    pub fn rotated_start(&self, offset: usize) -> Contour {
        let mut points = self.points.clone();
        let n = points.len();
        points.rotate_left(offset % n);
        Contour {
            points,
            counterclockwise: self.counterclockwise,
        }
    }

    /// Applies `f` to every vertex.
    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Contour> {
        Contour::new(self.points.iter().map(|&p| f(p)).collect())
    }
}

pub(crate) fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn signed_area(points: &[Point]) -> f64 {
    let n = points.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (points[i], points[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    twice / 2.0
}

/// Edge midpoints in doubled integer coordinates (`2 * row`, `2 * col`).
type Key = (i32, i32);

/// All closed 0.5-level loops of the indicator of `region`.
///
/// Saddle cells take the bilinear centre value (exactly 0.5 for a binary
/// field) as inside, which joins diagonal foreground pixels.
pub fn trace_loops(region: &BinaryMask) -> Vec<Vec<Point>> {
    let (h, w) = (region.height() as i32, region.width() as i32);
    let inside = |r: i32, c: i32| r >= 0 && c >= 0 && r < h && c < w && region.get(r as usize, c as usize);

    let mut adjacency: HashMap<Key, [Option<Key>; 2]> = HashMap::new();
    let mut link = |a: Key, b: Key| {
        for (from, to) in [(a, b), (b, a)] {
            let slot = adjacency.entry(from).or_insert([None, None]);
            if slot[0].is_none() {
                slot[0] = Some(to);
            } else {
                slot[1] = Some(to);
            }
        }
    };

    // cell (r, c) spans pixel centres (r, c) .. (r + 1, c + 1)
    for r in -1..h {
        for c in -1..w {
            let tl = inside(r, c);
            let tr = inside(r, c + 1);
            let br = inside(r + 1, c + 1);
            let bl = inside(r + 1, c);
            let top = (2 * r, 2 * c + 1);
            let bottom = (2 * r + 2, 2 * c + 1);
            let left = (2 * r + 1, 2 * c);
            let right = (2 * r + 1, 2 * c + 2);

            let mut crossings = Vec::with_capacity(4);
            if tl != tr {
                crossings.push(top);
            }
            if tr != br {
                crossings.push(right);
            }
            if br != bl {
                crossings.push(bottom);
            }
            if bl != tl {
                crossings.push(left);
            }
            match crossings.len() {
                0 => {}
                2 => link(crossings[0], crossings[1]),
                4 => {
                    // centre is inside: cut off the two background corners
                    if tl {
                        link(top, right);
                        link(left, bottom);
                    } else {
                        link(left, top);
                        link(right, bottom);
                    }
                }
                _ => unreachable!("a cell has an even number of crossings"),
            }
        }
    }

    let mut starts: Vec<Key> = adjacency.keys().copied().collect();
    starts.sort_unstable();
    let mut visited: HashMap<Key, bool> = HashMap::with_capacity(starts.len());
    let mut loops = Vec::new();
    for start in starts {
        if visited.contains_key(&start) {
            continue;
        }
        let mut ring = vec![start];
        visited.insert(start, true);
        let mut prev = start;
        let mut cur = adjacency[&start][0].expect("every edge point has two neighbours");
        while cur != start {
            visited.insert(cur, true);
            ring.push(cur);
            let [a, b] = adjacency[&cur];
            let next = if a != Some(prev) { a } else { b };
            prev = cur;
            cur = next.expect("closed loop");
        }
        loops.push(
            ring.into_iter()
                .map(|(r2, c2)| [r2 as f64 / 2.0, c2 as f64 / 2.0])
                .collect(),
        );
    }
    loops
}

/// Longest closed 0.5-level contour of `region`, oriented counterclockwise.
pub fn marching_squares(region: &BinaryMask) -> Result<Contour> {
    let best = trace_loops(region)
        .into_iter()
        .map(|pts| {
            let len = Contour::new(pts.clone()).map(|c| c.perimeter()).unwrap_or(0.0);
            (pts, len)
        })
        .fold(None::<(Vec<Point>, f64)>, |best, (pts, len)| match best {
            Some((_, b)) if b >= len => best,
            _ => Some((pts, len)),
        })
        .ok_or(Error::EmptyShape)?;
    let contour = Contour::new(best.0)?;
    Ok(if contour.is_counterclockwise() {
        contour
    } else {
        contour.reversed()
    })
}
