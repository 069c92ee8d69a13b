use std::fs;
use std::io::Write;
use std::path::Path as FsPath;

use crate::controllers::{Pose, VelocityReference};
use crate::error::{Error, Result};

/// Ordered waypoint polyline with cumulative chord length.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    cx: Vec<f64>,
    cy: Vec<f64>,
    arc: Vec<f64>,
}

impl Path {
    pub fn new(cx: Vec<f64>, cy: Vec<f64>) -> Result<Self> {
        if cx.len() != cy.len() {
            return Err(Error::invalid("path", "x and y arrays must have equal length", format!("{} vs {}", cx.len(), cy.len())));
        }
        if cx.len() < 2 {
            return Err(Error::invalid("path", "needs at least two waypoints", cx.len()));
        }
        if cx.iter().chain(&cy).any(|c| !c.is_finite()) {
            return Err(Error::invalid("path", "coordinates must be finite", "non-finite"));
        }
        let mut arc = Vec::with_capacity(cx.len());
        arc.push(0.0);
        for i in 1..cx.len() {
            let seg = (cx[i] - cx[i - 1]).hypot(cy[i] - cy[i - 1]);
            let next = arc[i - 1] + seg;
            if seg <= 0.0 || next <= arc[i - 1] {
                return Err(Error::invalid("path", "consecutive waypoints must not coincide", format!("index {i}")));
            }
            arc.push(next);
        }
        Ok(Self { cx, cy, arc })
    }

    pub fn from_points(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let (cx, cy) = points.into_iter().unzip();
        Self::new(cx, cy)
    }

    pub fn len(&self) -> usize {
        self.cx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cx.is_empty()
    }

    pub fn cx(&self) -> &[f64] {
        &self.cx
    }

    pub fn cy(&self) -> &[f64] {
        &self.cy
    }

    pub fn point(&self, i: usize) -> (f64, f64) {
        (self.cx[i], self.cy[i])
    }

    /// Cumulative chord length from index 0.
    pub fn arc_at(&self, i: usize) -> f64 {
        self.arc[i]
    }

    pub fn total_length(&self) -> f64 {
        self.arc[self.arc.len() - 1]
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        (self.cx[i] - self.cx[i - 1]).hypot(self.cy[i] - self.cy[i - 1])
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::invalid("index", "must lie inside the path", i))
        }
    }

    /// Follower target index: walks back from `leader_index`, summing
    /// segment lengths until at least `gap_des` is covered. Stops at 0.
    pub fn target_waypoint(&self, leader_index: usize, gap_des: f64) -> Result<usize> {
        self.check_index(leader_index)?;
        if !(gap_des >= 0.0) {
            return Err(Error::invalid("gap_des", "must be >= 0", gap_des));
        }
        let mut d = 0.0;
        let mut i = leader_index;
        while d < gap_des && i > 0 {
            d += self.segment_length(i);
            i -= 1;
        }
        Ok(i)
    }

    /// Index `distance` metres ahead of `index` by forward accumulation.
    pub fn index_ahead(&self, index: usize, distance: f64) -> usize {
        let mut d = 0.0;
        let mut i = index;
        while d < distance && i + 1 < self.len() {
            i += 1;
            d += self.segment_length(i);
        }
        i
    }

    /// Tangent heading at `i` (forward difference; backward at the end).
    pub fn tangent(&self, i: usize) -> f64 {
        let (a, b) = if i + 1 < self.len() { (i, i + 1) } else { (i - 1, i) };
        (self.cy[b] - self.cy[a]).atan2(self.cx[b] - self.cx[a])
    }

    pub fn reference_pose(&self, i: usize) -> Pose {
        Pose::new(self.cx[i], self.cy[i], self.tangent(i))
    }

    /// Signed discrete Menger curvature; zero at both endpoints.
    pub fn curvature(&self, i: usize) -> f64 {
        if i == 0 || i + 1 >= self.len() {
            return 0.0;
        }
        let (ax, ay) = self.point(i - 1);
        let (bx, by) = self.point(i);
        let (cx, cy) = self.point(i + 1);
        let cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx);
        let ab = (bx - ax).hypot(by - ay);
        let bc = (cx - bx).hypot(cy - by);
        let ac = (cx - ax).hypot(cy - ay);
        2.0 * cross / (ab * bc * ac)
    }

    pub fn reference_velocity(&self, i: usize, v_d: f64) -> VelocityReference {
        VelocityReference {
            v_d,
            omega_d: self.curvature(i) * v_d,
        }
    }

    /// Pose and curvature at arc length `s`, interpolated along the polyline.
    /// `s` is clamped to the path.
    pub fn sample_at_arc(&self, s: f64) -> (Pose, f64) {
        let s = s.clamp(0.0, self.total_length());
        let seg = match self.arc.binary_search_by(|a| a.total_cmp(&s)) {
            Ok(i) => i.max(1),
            Err(i) => i,
        }
        .min(self.len() - 1);
        let t = (s - self.arc[seg - 1]) / (self.arc[seg] - self.arc[seg - 1]);
        let x = self.cx[seg - 1] + t * (self.cx[seg] - self.cx[seg - 1]);
        let y = self.cy[seg - 1] + t * (self.cy[seg] - self.cy[seg - 1]);
        let kappa = (1.0 - t) * self.curvature(seg - 1) + t * self.curvature(seg);
        (Pose::new(x, y, self.tangent(seg - 1)), kappa)
    }

    /// Arc length between two indices minus the desired gap.
    pub fn gap_error(&self, idx_front: usize, idx_rear: usize, gap_des: f64) -> f64 {
        self.arc[idx_front] - self.arc[idx_rear] - gap_des
    }

    fn dist2(&self, i: usize, x: f64, y: f64) -> f64 {
        let dx = self.cx[i] - x;
        let dy = self.cy[i] - y;
        dx * dx + dy * dy
    }

    fn nearest_in(&self, lo: usize, hi: usize, x: f64, y: f64) -> usize {
        let mut best = lo;
        let mut best_d = f64::INFINITY;
        for i in lo..=hi {
            let d = self.dist2(i, x, y);
            // `<=` breaks ties toward the larger index.
            if d <= best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Index minimising Euclidean distance over the whole path.
    pub fn nearest_index(&self, x: f64, y: f64) -> usize {
        self.nearest_in(0, self.len() - 1, x, y)
    }

    /// Nearest index restricted to `window` waypoints either side of `hint`.
    ///
    /// Self-intersecting paths need this: a global search snaps robots onto
    /// the wrong branch at a crossing.
    pub fn nearest_index_near(&self, x: f64, y: f64, hint: usize, window: usize) -> usize {
        let lo = hint.saturating_sub(window);
        let hi = (hint + window).min(self.len() - 1);
        self.nearest_in(lo, hi, x, y)
    }

    /// Reads one `x y` pair per line. Blank lines and `#` comments are skipped.
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                path: path.to_owned(),
                line: n + 1,
                msg,
            };
            let mut fields = line.split_whitespace();
            let mut next = || -> Result<f64> {
                let tok = fields.next().ok_or_else(|| parse_err("expected two numbers".into()))?;
                tok.parse::<f64>().map_err(|e| parse_err(format!("`{tok}`: {e}")))
            };
            let x = next()?;
            let y = next()?;
            if fields.next().is_some() {
                return Err(parse_err("expected exactly two numbers".into()));
            }
            points.push((x, y));
        }
        Self::from_points(points)
    }

    pub fn save(&self, path: &FsPath) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_owned(),
            source,
        };
        let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io)?);
        for (x, y) in self.cx.iter().zip(&self.cy) {
            writeln!(out, "{x} {y}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn x_axis(n: usize) -> Path {
        Path::from_points((0..=n).map(|i| (i as f64, 0.0))).unwrap()
    }

    fn circle(radius: f64) -> Path {
        Path::from_points((0..360).map(|deg| {
            let a = (deg as f64).to_radians();
            (radius * a.cos(), radius * a.sin())
        }))
        .unwrap()
    }

    #[test]
    fn construction_rules() {
        assert!(Path::new(vec![], vec![]).is_err());
        assert!(Path::new(vec![1.0], vec![1.0]).is_err());
        assert!(Path::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Path::new(vec![0.0, 1.0], vec![0.0]).is_err());
        let p = x_axis(10);
        assert_eq!(p.total_length(), 10.0);
    }

    #[test]
    fn target_waypoint_examples() {
        let p = x_axis(10);
        assert_eq!(p.target_waypoint(5, 1.0).unwrap(), 4);
        assert_eq!(p.target_waypoint(5, 0.0).unwrap(), 5);
        assert_eq!(p.target_waypoint(5, 2.5).unwrap(), 2);
        assert_eq!(p.target_waypoint(5, 50.0).unwrap(), 0);
        assert!(p.target_waypoint(11, 1.0).is_err());
        assert!(p.target_waypoint(5, -1.0).is_err());
    }

    #[test]
    fn tangent_examples() {
        let p = x_axis(10);
        assert_eq!(p.reference_pose(3).theta, 0.0);
        assert_eq!(p.reference_pose(10).theta, 0.0);
        let d = Path::from_points((0..10).map(|i| (i as f64, i as f64))).unwrap();
        assert_abs_diff_eq!(d.reference_pose(4).theta, FRAC_PI_4, epsilon = 1e-15);
        let c = circle(5.0);
        assert!(crate::controllers::wrap_angle(c.reference_pose(90).theta - PI).abs() < 0.02);
    }

    #[test]
    fn curvature_examples() {
        let p = x_axis(10);
        assert_eq!(p.reference_velocity(4, 2.0).omega_d, 0.0);
        let c = circle(5.0);
        let w = c.reference_velocity(90, 2.0).omega_d;
        assert!((w - 0.4).abs() < 0.4 * 0.02, "{w}");
        assert_eq!(c.reference_velocity(90, 0.0).omega_d, 0.0);
        assert_eq!(c.curvature(0), 0.0);
        assert_eq!(c.curvature(359), 0.0);
        // Clockwise traversal turns right.
        let cw = Path::from_points((0..360).map(|deg| {
            let a = -(deg as f64).to_radians();
            (5.0 * a.cos(), 5.0 * a.sin())
        }))
        .unwrap();
        assert!(cw.curvature(90) < 0.0);
    }

    #[test]
    fn arc_sampling_interpolates() {
        let p = x_axis(10);
        let (pose, kappa) = p.sample_at_arc(2.25);
        assert_eq!((pose.x, pose.y, pose.theta, kappa), (2.25, 0.0, 0.0, 0.0));
        assert_eq!(p.sample_at_arc(-1.0).0.x, 0.0);
        assert_eq!(p.sample_at_arc(99.0).0.x, 10.0);
        assert_eq!(p.sample_at_arc(0.0).0.x, 0.0);
    }

    #[test]
    fn gap_error_examples() {
        let p = x_axis(10);
        assert_eq!(p.gap_error(3, 3, 1.0), -1.0);
        assert_eq!(p.gap_error(7, 4, 1.0), 2.0);
        assert_eq!(p.gap_error(6, 5, 1.0), 0.0);
    }

    #[test]
    fn nearest_index_ties_go_forward() {
        let p = x_axis(10);
        assert_eq!(p.nearest_index(2.5, 1.0), 3);
        assert_eq!(p.nearest_index(2.4, 0.0), 2);
        assert_eq!(p.nearest_index_near(9.0, 0.0, 2, 3), 5);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("path.txt");
        let c = circle(3.0);
        c.save(&file).unwrap();
        let back = Path::load(&file).unwrap();
        assert_eq!(back, c);

        std::fs::write(&file, "0 0\n1 x\n").unwrap();
        let err = Path::load(&file).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
        std::fs::write(&file, "# header\n\n0 0\n1 0.5\n").unwrap();
        assert_eq!(Path::load(&file).unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn target_is_monotone_and_tight(
            segs in proptest::collection::vec(0.01..2.0f64, 2..60),
            leader_frac in 0.0..1.0f64,
            g1 in 0.0..20.0f64,
            g2 in 0.0..20.0f64,
        ) {
            let mut pts = vec![(0.0, 0.0)];
            let mut heading = 0.0f64;
            for (k, s) in segs.iter().enumerate() {
                heading += 0.3 * ((k as f64) * 1.7).sin();
                let (x, y) = *pts.last().unwrap();
                pts.push((x + s * heading.cos(), y + s * heading.sin()));
            }
            let p = Path::from_points(pts).unwrap();
            let leader = ((p.len() - 1) as f64 * leader_frac) as usize;
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let i_lo = p.target_waypoint(leader, lo).unwrap();
            let i_hi = p.target_waypoint(leader, hi).unwrap();
            prop_assert!(i_hi <= i_lo);
            prop_assert!(i_lo <= leader);
            if i_lo > 0 {
                let gap = p.arc_at(leader) - p.arc_at(i_lo);
                let max_seg = (1..p.len()).map(|i| p.segment_length(i)).fold(0.0, f64::max);
                prop_assert!(gap >= lo - 1e-9);
                prop_assert!(gap < lo + max_seg + 1e-9);
            }
        }
    }
}
