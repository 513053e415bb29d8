//! Eye-point rotation and the world → view → clip → window chain.
//!
//! Matrices act on column vectors (`m * v`). Heading is measured clockwise
//! from north about the local up axis, the aviation convention, so the
//! heading factor is a negative rotation about `z` in the east-north-up
//! frame. The whole sign convention lives in [`rotation_from_posture`].

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::EcefPoint;

/// Default vertical field of view, degrees.
pub const DEFAULT_FOV_Y_DEG: f64 = 60.0;
pub const DEFAULT_ASPECT: f64 = 16.0 / 9.0;
pub const DEFAULT_NEAR: f64 = 1.0;
pub const DEFAULT_FAR: f64 = 1e8;
pub const DEFAULT_WIDTH_PX: u32 = 1920;
pub const DEFAULT_HEIGHT_PX: u32 = 1080;

/// Homogeneous `w` at or below this means the point is not in front of the eye.
const MIN_CLIP_W: f64 = 1e-12;

/// Heading, pitch and roll in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Posture {
    pub heading: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Posture {
    pub fn new(heading: f64, pitch: f64, roll: f64) -> Result<Self> {
        let p = Posture {
            heading,
            pitch,
            roll,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.heading.is_finite() && (0.0..360.0).contains(&self.heading)) {
            return Err(Error::validation(
                "heading",
                format!("{} outside [0, 360)", self.heading),
            ));
        }
        if !(-90.0..=90.0).contains(&self.pitch) {
            return Err(Error::validation(
                "pitch",
                format!("{} outside [-90, 90]", self.pitch),
            ));
        }
        if !(-180.0..=180.0).contains(&self.roll) {
            return Err(Error::validation(
                "roll",
                format!("{} outside [-180, 180]", self.roll),
            ));
        }
        Ok(())
    }
}

fn rot_x(deg: f64) -> Matrix3<f64> {
    let (s, c) = deg.to_radians().sin_cos();
    #[rustfmt::skip]
    let m = Matrix3::new(
        1.0, 0.0, 0.0,
        0.0,   c,  -s,
        0.0,   s,   c,
    );
    m
}

fn rot_y(deg: f64) -> Matrix3<f64> {
    let (s, c) = deg.to_radians().sin_cos();
    #[rustfmt::skip]
    let m = Matrix3::new(
          c, 0.0,   s,
        0.0, 1.0, 0.0,
         -s, 0.0,   c,
    );
    m
}

fn rot_z(deg: f64) -> Matrix3<f64> {
    let (s, c) = deg.to_radians().sin_cos();
    #[rustfmt::skip]
    let m = Matrix3::new(
          c,  -s, 0.0,
          s,   c, 0.0,
        0.0, 0.0, 1.0,
    );
    m
}

/// Local rotation of the eye: `Rz(heading) · Ry(pitch) · Rx(roll)`.
///
/// Flip the sign of the heading factor here to switch to a
/// counter-clockwise heading convention.
pub fn rotation_from_posture(p: &Posture) -> Matrix3<f64> {
    rot_z(-p.heading) * rot_y(p.pitch) * rot_x(p.roll)
}

/// Combines a local rotation with the local frame basis at the eye.
///
/// Written in row-vector form the product is `r · lsr`: rotate in the local
/// frame first, then carry the result into ECEF. With column vectors that is
/// `lsr * r`, which is what is returned. The result's columns are the eye
/// axes expressed in ECEF.
pub fn rotation_in_lsr(r: &Matrix3<f64>, lsr: &Matrix3<f64>) -> Matrix3<f64> {
    lsr * r
}

/// Eye orientation (columns = eye axes in ECEF) and position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub rotation_lsr: Matrix3<f64>,
    pub eye: EcefPoint,
}

impl CameraPose {
    /// Camera-to-world rigid transform.
    pub fn camera_to_world(&self) -> Matrix4<f64> {
        let mut m = self.rotation_lsr.to_homogeneous();
        m.fixed_view_mut::<3, 1>(0, 3)
            .copy_from(&self.eye.to_vector());
        m
    }
}

/// View matrix: the rigid inverse of [`CameraPose::camera_to_world`], so the
/// eye maps to the origin.
pub fn view_matrix_of(pose: &CameraPose) -> Matrix4<f64> {
    let rt = pose.rotation_lsr.transpose();
    let t: Vector3<f64> = -(rt * pose.eye.to_vector());
    let mut m = rt.to_homogeneous();
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t);
    m
}

/// Perspective projection and window (viewport) matrices.
///
/// The projection looks down the eye's `-z` axis and maps the frustum to
/// clip space `[-1, 1]³`. The window matrix takes normalized device
/// coordinates to pixels with the origin at the top-left corner and
/// depth in `[0, 1]`.
pub fn make_fixed_pm_wm(
    fov_y_deg: f64,
    aspect: f64,
    near: f64,
    far: f64,
    width_px: u32,
    height_px: u32,
) -> Result<(Matrix4<f64>, Matrix4<f64>)> {
    if !(fov_y_deg > 0.0 && fov_y_deg < 180.0) {
        return Err(Error::Domain(format!(
            "field of view {fov_y_deg} outside (0, 180)"
        )));
    }
    if !(aspect.is_finite() && aspect > 0.0) {
        return Err(Error::Domain(format!(
            "aspect ratio {aspect} must be positive"
        )));
    }
    if !(near.is_finite() && near > 0.0 && far.is_finite() && far > near) {
        return Err(Error::Domain(format!(
            "invalid depth range near={near} far={far}"
        )));
    }
    if width_px == 0 || height_px == 0 {
        return Err(Error::Domain("window dimensions must be positive".into()));
    }

    let f = 1.0 / (fov_y_deg.to_radians() / 2.0).tan();
    #[rustfmt::skip]
    let pm = Matrix4::new(
        f / aspect, 0.0, 0.0, 0.0,
        0.0, f, 0.0, 0.0,
        0.0, 0.0, (far + near) / (near - far), 2.0 * far * near / (near - far),
        0.0, 0.0, -1.0, 0.0,
    );

    let (w, h) = (width_px as f64, height_px as f64);
    #[rustfmt::skip]
    let wm = Matrix4::new(
        w / 2.0, 0.0, 0.0, w / 2.0,
        0.0, -h / 2.0, 0.0, h / 2.0,
        0.0, 0.0, 0.5, 0.5,
        0.0, 0.0, 0.0, 1.0,
    );
    Ok((pm, wm))
}

/// Projection and window matrices with the crate defaults (60° vertical
/// field of view, 16:9, 1 m to 1e8 m, 1920×1080).
pub fn default_pm_wm() -> (Matrix4<f64>, Matrix4<f64>) {
    make_fixed_pm_wm(
        DEFAULT_FOV_Y_DEG,
        DEFAULT_ASPECT,
        DEFAULT_NEAR,
        DEFAULT_FAR,
        DEFAULT_WIDTH_PX,
        DEFAULT_HEIGHT_PX,
    )
    .expect("default frustum is valid")
}

/// A projected point: pixel coordinates and normalized depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenPoint {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

/// Projects an ECEF point through view, projection and window matrices,
/// applied in that order with a perspective divide after the projection.
pub fn world_to_screen(
    p: &EcefPoint,
    vm: &Matrix4<f64>,
    pm: &Matrix4<f64>,
    wm: &Matrix4<f64>,
) -> Result<ScreenPoint> {
    let world = Vector4::new(p.x, p.y, p.z, 1.0);
    let clip = pm * (vm * world);
    if clip.w <= MIN_CLIP_W {
        return Err(Error::Projection(format!(
            "point is not in front of the eye (w = {:e})",
            clip.w
        )));
    }
    let ndc = Vector4::new(clip.x / clip.w, clip.y / clip.w, clip.z / clip.w, 1.0);
    let win = wm * ndc;
    Ok(ScreenPoint {
        x: win.x,
        y: win.y,
        depth: win.z,
    })
}
