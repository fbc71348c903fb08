use crate::math::{Ray, Vec3};

/// Pinhole camera. Pixel `(0, 0)` is the top-left corner of the image.
#[derive(Clone, Debug, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    pub target: Vec3,
    pub up: Vec3,
    /// Vertical field of view in degrees.
    pub fov: f64,
    pub width: usize,
    pub height: usize,
    forward: Vec3,
    right: Vec3,
    true_up: Vec3,
    tan_half: f64,
}

impl Camera {
    pub fn new(position: Vec3, target: Vec3, up: Vec3, fov: f64, width: usize, height: usize) -> Self {
        let forward = (target - position).normalized();
        let right = forward.cross(up).normalized();
        let true_up = right.cross(forward);
        Self {
            position,
            target,
            up,
            fov,
            width,
            height,
            forward,
            right,
            true_up,
            tan_half: (fov.to_radians() * 0.5).tan(),
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn aspect(&self) -> f64 {
        self.width as f64 / self.height as f64
    }

    /// Point on the image plane one unit in front of the eye for film position `(sx, sy)` in pixels.
    pub fn image_plane_point(&self, sx: f64, sy: f64) -> Vec3 {
        let ndc_x = (2.0 * sx / self.width as f64 - 1.0) * self.tan_half * self.aspect();
        let ndc_y = (1.0 - 2.0 * sy / self.height as f64) * self.tan_half;
        self.position + self.forward + self.right * ndc_x + self.true_up * ndc_y
    }

    /// Ray through pixel `(px, py)` at sub-pixel offset `(jx, jy)` in `[0, 1]`.
    pub fn generate_ray(&self, px: usize, py: usize, jx: f64, jy: f64) -> Ray {
        let p = self.image_plane_point(px as f64 + jx, py as f64 + jy);
        Ray::new(self.position, (p - self.position).normalized())
    }
}
