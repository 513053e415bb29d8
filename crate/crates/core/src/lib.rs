//! Flight trajectory recreation and headless playback.
//!
//! The pipeline ingests per-photograph flight records (position plus
//! heading/pitch/roll), smooths the track with an interpolating cubic
//! B-spline, converts poses to ECEF camera keyframes and replays them
//! frame by frame, producing view matrices. KML trajectory marks and
//! geometry sidecars for the photographs are emitted along the way.

pub mod camera;
pub mod error;
pub mod formats;
pub mod geodesy;
mod kv;
pub mod playback;
pub mod spline;
pub mod trajectory;

pub use camera::{CameraPose, Posture, ScreenPoint};
pub use error::{Error, Result};
pub use formats::{GeometryHeader, KmlTrajectoryDoc};
pub use geodesy::{lsr_basis_at, EcefPoint, Ellipsoid, GeodeticPoint, LsrVector, WGS84};
pub use playback::{Command, FrameRecord, SimEvent, SimState};
pub use spline::{Point2, SplineCurve};
pub use trajectory::{
    AnimationPath, ConfigRecord, ControlPoint, FlightRecord, PathPoint, PhotoMeta, SampleOrigin,
    SampledPose,
};
