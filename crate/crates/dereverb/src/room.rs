//! Rectangular room geometry.
//!
//! The coordinate origin is the room center, so a point is inside the room
//! iff |p_i| < dims_i / 2 on every axis. All file formats record dimensions
//! and point coordinates explicitly so the convention never has to be
//! inferred.

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

/// A point in meters, origin at the room center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "point coordinates must be finite, got ({x}, {y}, {z})"
            )));
        }
        Ok(Self { x, y, z })
    }

    pub fn distance_to(&self, other: &Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> [f64; 3] {
        p.coords()
    }
}

impl TryFrom<[f64; 3]> for Point3 {
    type Error = Error;

    fn try_from(c: [f64; 3]) -> Result<Point3> {
        Point3::new(c[0], c[1], c[2])
    }
}

/// Rectangular cavity with uniform wall reflectivity.
///
/// `reflection` is the pressure reflection coefficient r of Sabine
/// absorptivity a = 1 - r^2; r is the stored quantity and a is always
/// derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomModel {
    /// Interior dimensions (L_x, L_y, L_z) in meters.
    pub dims: [f64; 3],
    /// Wall reflection coefficient in [0, 1], identical for all six walls.
    pub reflection: f64,
    /// Speed of sound in m/s.
    pub speed_of_sound: f64,
    /// Sample rate in Hz.
    pub sample_rate: f64,
    /// Length of a simulated impulse response in samples.
    pub ir_length: usize,
}

impl RoomModel {
    pub fn new(
        dims: [f64; 3],
        reflection: f64,
        speed_of_sound: f64,
        sample_rate: f64,
        ir_length: usize,
    ) -> Result<Self> {
        if !dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(Error::InvalidRoom(format!(
                "dimensions must be positive, got {dims:?}"
            )));
        }
        if !(0.0..=1.0).contains(&reflection) {
            return Err(Error::InvalidRoom(format!(
                "reflection coefficient must lie in [0, 1], got {reflection}"
            )));
        }
        if !(speed_of_sound.is_finite() && speed_of_sound > 0.0) {
            return Err(Error::InvalidRoom(format!(
                "speed of sound must be positive, got {speed_of_sound}"
            )));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidRoom(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if ir_length == 0 {
            return Err(Error::InvalidRoom("ir_length must be positive".into()));
        }
        Ok(Self {
            dims,
            reflection,
            speed_of_sound,
            sample_rate,
            ir_length,
        })
    }

    /// Average Sabine absorptivity a = 1 - r^2.
    pub fn absorptivity(&self) -> f64 {
        1.0 - self.reflection * self.reflection
    }

    /// Duration of the simulated response in seconds.
    pub fn duration(&self) -> f64 {
        self.ir_length as f64 / self.sample_rate
    }

    pub fn volume(&self) -> f64 {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn surface_area(&self) -> f64 {
        let [lx, ly, lz] = self.dims;
        2.0 * (lx * ly + ly * lz + lx * lz)
    }

    /// True iff the point lies strictly inside the cavity.
    pub fn contains(&self, p: &Point3) -> bool {
        self.axis_violation(p).is_none()
    }

    fn axis_violation(&self, p: &Point3) -> Option<Axis> {
        let c = p.coords();
        for (i, axis) in [Axis::X, Axis::Y, Axis::Z].into_iter().enumerate() {
            if !c[i].is_finite() || c[i].abs() >= self.dims[i] / 2.0 {
                return Some(axis);
            }
        }
        None
    }
}

/// Checks that every point lies strictly inside the room.
pub fn validate_geometry(room: &RoomModel, points: &[Point3]) -> Result<()> {
    for (index, p) in points.iter().enumerate() {
        if let Some(axis) = room.axis_violation(p) {
            return Err(Error::PointOutsideRoom { index, axis });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(side: f64) -> RoomModel {
        RoomModel::new([side; 3], 0.9, 340.0, 8000.0, 1024).unwrap()
    }

    #[test]
    fn center_point_is_inside() {
        let room = cube(2.0);
        let p = Point3::new(0.0, 0.0, 0.0).unwrap();
        assert!(validate_geometry(&room, &[p]).is_ok());
    }

    #[test]
    fn plywood_cube_pistol_position_is_inside() {
        let room = RoomModel::new([1.84, 1.79, 1.83], 0.9794, 346.58, 44100.0, 65536).unwrap();
        let pistol = Point3::new(0.26, 0.30, -0.15).unwrap();
        assert!(validate_geometry(&room, &[pistol]).is_ok());
    }

    #[test]
    fn point_beyond_half_width_is_rejected() {
        let room = cube(2.0);
        let p = Point3::new(1.5, 0.0, 0.0).unwrap();
        match validate_geometry(&room, &[p]) {
            Err(Error::PointOutsideRoom { index: 0, axis: Axis::X }) => {}
            other => panic!("expected PointOutsideRoom on x, got {other:?}"),
        }
    }

    #[test]
    fn boundary_point_is_not_strictly_inside() {
        let room = cube(2.0);
        let p = Point3::new(1.0, 0.0, 0.0).unwrap();
        assert!(validate_geometry(&room, &[p]).is_err());
    }

    #[test]
    fn violation_reports_index_and_axis() {
        let room = cube(2.0);
        let ok = Point3::new(0.1, -0.2, 0.3).unwrap();
        let bad = Point3::new(0.0, 0.0, -7.0).unwrap();
        match validate_geometry(&room, &[ok, bad]) {
            Err(Error::PointOutsideRoom { index: 1, axis: Axis::Z }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_room_constructions_are_rejected() {
        assert!(RoomModel::new([0.0, 1.0, 1.0], 0.5, 340.0, 8000.0, 64).is_err());
        assert!(RoomModel::new([1.0; 3], 1.5, 340.0, 8000.0, 64).is_err());
        assert!(RoomModel::new([1.0; 3], -0.1, 340.0, 8000.0, 64).is_err());
        assert!(RoomModel::new([1.0; 3], 0.5, 0.0, 8000.0, 64).is_err());
        assert!(RoomModel::new([1.0; 3], 0.5, 340.0, -1.0, 64).is_err());
        assert!(RoomModel::new([1.0; 3], 0.5, 340.0, 8000.0, 0).is_err());
    }

    #[test]
    fn non_finite_point_is_rejected() {
        assert!(Point3::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(Point3::new(0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn absorptivity_is_derived_from_reflection() {
        let room = RoomModel::new([1.0; 3], 0.8, 340.0, 8000.0, 64).unwrap();
        assert!((room.absorptivity() - 0.36).abs() < 1e-15);
    }
}
