use roadwork_core::geometry::Pose2D;

use super::scenario::PathVertex;

/// Piecewise-linear drive at constant speed per segment.
#[derive(Debug, Clone)]
pub struct PathTrack {
    vertices: Vec<PathVertex>,
    cum_s: Vec<f64>,
    cum_t: Vec<f64>,
}

impl PathTrack {
    /// `vertices` must hold at least two distinct points and positive
    /// segment speeds (see `Scenario::validate`).
    pub fn new(vertices: &[PathVertex]) -> Self {
        let mut cum_s = vec![0.0];
        let mut cum_t = vec![0.0];
        for w in vertices.windows(2) {
            let len = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
            cum_s.push(cum_s.last().unwrap() + len);
            cum_t.push(cum_t.last().unwrap() + len / w[0].speed);
        }
        Self {
            vertices: vertices.to_vec(),
            cum_s,
            cum_t,
        }
    }

    pub fn duration(&self) -> f64 {
        *self.cum_t.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        *self.cum_s.last().unwrap()
    }

    fn segment_dir(&self, i: usize) -> ([f64; 2], f64) {
        let (a, b) = (&self.vertices[i], &self.vertices[i + 1]);
        let len = self.cum_s[i + 1] - self.cum_s[i];
        ([(b.x - a.x) / len, (b.y - a.y) / len], len)
    }

    /// Pose and speed at time `t`, clamped to the ends of the path.
    pub fn state(&self, t: f64) -> (Pose2D, f64) {
        let segments = self.vertices.len() - 1;
        let t = t.clamp(0.0, self.duration());
        let i = (0..segments).find(|&i| t < self.cum_t[i + 1]).unwrap_or(segments - 1);
        let (dir, len) = self.segment_dir(i);
        let speed = self.vertices[i].speed;
        let along = ((t - self.cum_t[i]) * speed).min(len);
        let a = &self.vertices[i];
        let pose = Pose2D::new(a.x + dir[0] * along, a.y + dir[1] * along, dir[1].atan2(dir[0]));
        (pose, speed)
    }

    /// Arc-length position and signed lateral offset (positive to the left)
    /// of the closest point on the path.
    pub fn project(&self, p: [f64; 2]) -> (f64, f64) {
        let mut best: Option<(f64, f64, f64)> = None;
        for i in 0..self.vertices.len() - 1 {
            let (dir, len) = self.segment_dir(i);
            let a = &self.vertices[i];
            let rel = [p[0] - a.x, p[1] - a.y];
            let u = (rel[0] * dir[0] + rel[1] * dir[1]).clamp(0.0, len);
            let foot = [a.x + dir[0] * u, a.y + dir[1] * u];
            let dist = (p[0] - foot[0]).hypot(p[1] - foot[1]);
            let lateral = dir[0] * rel[1] - dir[1] * rel[0];
            if best.is_none_or(|(d, _, _)| dist < d) {
                best = Some((dist, self.cum_s[i] + u, lateral));
            }
        }
        let (_, s, lateral) = best.expect("path has a segment");
        (s, lateral)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: f64, y: f64, speed: f64) -> PathVertex {
        PathVertex { x, y, speed }
    }

    #[test]
    fn constant_speed_segments() {
        let p = PathTrack::new(&[v(0.0, 0.0, 10.0), v(100.0, 0.0, 5.0), v(100.0, 50.0, 5.0)]);
        assert_eq!(p.duration(), 20.0);
        assert_eq!(p.length(), 150.0);
        let (pose, speed) = p.state(5.0);
        assert_eq!((pose.x, pose.y, speed), (50.0, 0.0, 10.0));
        let (pose, speed) = p.state(15.0);
        assert!((pose.y - 25.0).abs() < 1e-12 && (pose.heading - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert_eq!(speed, 5.0);
    }

    #[test]
    fn projection_gives_arc_and_side() {
        let p = PathTrack::new(&[v(0.0, 0.0, 10.0), v(100.0, 0.0, 10.0)]);
        assert_eq!(p.project([30.0, 3.0]), (30.0, 3.0));
        assert_eq!(p.project([30.0, -2.0]), (30.0, -2.0));
    }
}
