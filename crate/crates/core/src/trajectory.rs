//! Flight ingestion, trajectory smoothing and the time-keyed animation path.
//!
//! Longitude and latitude are smoothed with an interpolating B-spline,
//! posture angles are blended linearly along the shortest arc, and height
//! is held from the preceding input point.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{rotation_from_posture, rotation_in_lsr, CameraPose, Posture};
use crate::error::{Error, Result};
use crate::geodesy::{lsr_basis_at, EcefPoint, GeodeticPoint, WGS84};
use crate::kv;
use crate::spline::{Point2, SplineCurve};

/// File extension of flight configuration files.
pub const CONFIG_EXTENSION: &str = "cfg";

/// Interior samples per segment when none is requested.
pub const DEFAULT_SAMPLES_PER_SEGMENT: usize = 5;

const KNOWN_KEYS: [&str; 12] = [
    "image_file",
    "time",
    "longitude",
    "latitude",
    "height",
    "heading",
    "pitch",
    "roll",
    "image_width_px",
    "image_height_px",
    "pixel_scale_deg_x",
    "pixel_scale_deg_y",
];

/// One input flight sample, as read from a photograph's configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub time: f64,
    pub lon: f64,
    pub lat: f64,
    pub height: f64,
    pub heading: f64,
    pub pitch: f64,
    pub roll: f64,
    pub photo_ref: String,
}

impl PathPoint {
    pub fn geodetic(&self) -> GeodeticPoint {
        GeodeticPoint {
            lon: self.lon,
            lat: self.lat,
            h: self.height,
        }
    }

    pub fn posture(&self) -> Posture {
        Posture {
            heading: self.heading,
            pitch: self.pitch,
            roll: self.roll,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time.is_finite() && self.time >= 0.0) {
            return Err(Error::validation(
                "time",
                format!("{} must be >= 0", self.time),
            ));
        }
        if !(-90.0..=90.0).contains(&self.lat) {
            return Err(Error::validation(
                "latitude",
                format!("{} outside [-90, 90]", self.lat),
            ));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::validation(
                "longitude",
                format!("{} outside [-180, 180]", self.lon),
            ));
        }
        if !self.height.is_finite() {
            return Err(Error::validation("height", "must be finite"));
        }
        self.posture().validate()
    }
}

/// Raster facts needed to place a photograph on the globe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotoMeta {
    pub image_file: String,
    pub width_px: u32,
    pub height_px: u32,
    /// Degrees per pixel along x and y.
    pub pixel_scale_deg: (f64, f64),
}

impl PhotoMeta {
    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::validation(
                "image size",
                "dimensions must be at least 1 px",
            ));
        }
        let (sx, sy) = self.pixel_scale_deg;
        if !(sx.is_finite() && sx > 0.0 && sy.is_finite() && sy > 0.0) {
            return Err(Error::validation(
                "pixel scale",
                format!("({sx}, {sy}) must be positive"),
            ));
        }
        Ok(())
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRecord {
    pub point: PathPoint,
    pub photo: PhotoMeta,
    /// Whether the file carried a `time:` key. Without one, ingestion
    /// assigns times from file order.
    pub explicit_time: bool,
}

/// An ingested flight record: the sample and its photograph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub point: PathPoint,
    pub photo: PhotoMeta,
}

/// Wraps an angle into [0, 360).
pub fn normalize_heading(deg: f64) -> f64 {
    let h = deg.rem_euclid(360.0);
    // rem_euclid can round tiny negatives up to exactly 360
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

/// Wraps an angle into [-180, 180).
fn normalize_signed(deg: f64) -> f64 {
    normalize_heading(deg + 180.0) - 180.0
}

/// Parses one flight configuration file.
pub fn parse_flight_config(text: &str) -> Result<ConfigRecord> {
    let entries = kv::parse(text)?;
    for e in &entries {
        if !KNOWN_KEYS.contains(&e.key.as_str()) {
            warn!("line {}: ignoring unknown key \"{}\"", e.line, e.key);
        }
    }
    let num = |key: &str| kv::require(&entries, key)?.number();
    let image_file = kv::require(&entries, "image_file")?.value.clone();
    if image_file.is_empty() {
        return Err(Error::validation("image_file", "must not be empty"));
    }
    let time = kv::find(&entries, "time").map(|e| e.number()).transpose()?;

    let point = PathPoint {
        time: time.unwrap_or(0.0),
        lon: num("longitude")?,
        lat: num("latitude")?,
        height: num("height")?,
        heading: normalize_heading(num("heading")?),
        pitch: num("pitch")?,
        roll: num("roll")?,
        photo_ref: image_file.clone(),
    };
    point.validate()?;

    let photo = PhotoMeta {
        image_file,
        width_px: kv::require(&entries, "image_width_px")?.positive_integer()?,
        height_px: kv::require(&entries, "image_height_px")?.positive_integer()?,
        pixel_scale_deg: (num("pixel_scale_deg_x")?, num("pixel_scale_deg_y")?),
    };
    photo.validate()?;

    Ok(ConfigRecord {
        point,
        photo,
        explicit_time: time.is_some(),
    })
}

/// Lists the configuration files of a flight directory, sorted by name.
pub fn list_config_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let read = fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in read {
        let path = entry.map_err(|e| Error::Io(e.to_string()))?.path();
        if path.is_file() && path.extension().is_some_and(|x| x == CONFIG_EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Reads and parses one configuration file; errors name the file.
pub fn read_config_file(path: &Path) -> Result<ConfigRecord> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()).in_file(&name))?;
    parse_flight_config(&text).map_err(|e| e.in_file(name))
}

/// Orders parsed records into a flight.
///
/// `records` pairs each record with a source name used in error messages;
/// their order is the file order used when no record carries a time.
pub fn ingest_flight(records: Vec<(String, ConfigRecord)>) -> Result<Vec<FlightRecord>> {
    if records.len() < 2 {
        return Err(Error::Domain(format!(
            "a flight needs at least 2 records, got {}",
            records.len()
        )));
    }
    let timed = records.iter().filter(|(_, r)| r.explicit_time).count();
    if timed != 0 && timed != records.len() {
        let missing: Vec<&str> = records
            .iter()
            .filter(|(_, r)| !r.explicit_time)
            .map(|(n, _)| n.as_str())
            .collect();
        return Err(Error::validation(
            "time",
            format!(
                "either every record or none carries a time; missing in {}",
                missing.join(", ")
            ),
        ));
    }

    let mut named: Vec<(String, FlightRecord)> = records
        .into_iter()
        .enumerate()
        .map(|(i, (name, mut r))| {
            if timed == 0 {
                r.point.time = i as f64;
            }
            (
                name,
                FlightRecord {
                    point: r.point,
                    photo: r.photo,
                },
            )
        })
        .collect();
    named.sort_by(|a, b| a.1.point.time.total_cmp(&b.1.point.time));

    for w in named.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.1.point.time == b.1.point.time {
            return Err(Error::validation(
                "time",
                format!("{} and {} share time {}", a.0, b.0, a.1.point.time),
            ));
        }
        if (b.1.point.lon - a.1.point.lon).abs() > 180.0 {
            return Err(Error::Unsupported(format!(
                "flight crosses the antimeridian between {} and {}",
                a.0, b.0
            )));
        }
    }
    Ok(named.into_iter().map(|(_, r)| r).collect())
}

/// Blends two angles along the shortest arc; the result lies in [0, 360).
pub fn interpolate_angle(a0: f64, a1: f64, u: f64) -> f64 {
    let delta = normalize_signed(a1 - a0);
    normalize_heading(a0 + u * delta)
}

/// Blends two postures: heading and roll along the shortest arc, pitch
/// linearly.
pub fn interpolate_posture(a: &Posture, b: &Posture, u: f64) -> Posture {
    let roll_delta = normalize_signed(b.roll - a.roll);
    let roll = a.roll + u * roll_delta;
    Posture {
        heading: interpolate_angle(a.heading, b.heading, u),
        pitch: a.pitch + u * (b.pitch - a.pitch),
        roll: if (-180.0..=180.0).contains(&roll) {
            roll
        } else {
            normalize_signed(roll)
        },
    }
}

/// Where a trajectory sample came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleOrigin {
    Input,
    Interpolated,
}

/// A smoothed trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampledPose {
    pub time: f64,
    pub geodetic: GeodeticPoint,
    pub posture: Posture,
    pub origin: SampleOrigin,
}

/// Smooths a sorted flight, inserting `samples_per_segment` interpolated
/// poses between each pair of consecutive inputs.
///
/// The output holds `n + (n - 1) * k` samples in time order. Inputs are
/// reproduced exactly and flagged [`SampleOrigin::Input`].
pub fn interpolate_trajectory(
    points: &[PathPoint],
    samples_per_segment: usize,
) -> Result<Vec<SampledPose>> {
    let lonlat: Vec<Point2> = points.iter().map(|p| [p.lon, p.lat]).collect();
    let (curve, params) = SplineCurve::interpolate(&lonlat)?;

    let k = samples_per_segment;
    let mut out = Vec::with_capacity(points.len() + (points.len() - 1) * k);
    for (i, p) in points.iter().enumerate() {
        out.push(SampledPose {
            time: p.time,
            geodetic: p.geodetic(),
            posture: p.posture(),
            origin: SampleOrigin::Input,
        });
        let Some(next) = points.get(i + 1) else {
            break;
        };
        let (t0, t1) = (params[i], params[i + 1]);
        for j in 1..=k {
            let u = j as f64 / (k + 1) as f64;
            let [lon, lat] = curve.de_boor(t0 + u * (t1 - t0))?;
            let geodetic = GeodeticPoint::new(lon, lat, p.height).map_err(|e| {
                Error::Numeric(format!("smoothed track leaves the valid range: {e}"))
            })?;
            out.push(SampledPose {
                time: p.time + u * (next.time - p.time),
                geodetic,
                posture: interpolate_posture(&p.posture(), &next.posture(), u),
                origin: SampleOrigin::Interpolated,
            });
        }
    }
    Ok(out)
}

/// A playback keyframe: eye position, orientation and scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    pub position: EcefPoint,
    pub rotation: UnitQuaternion<f64>,
    pub scale: Vector3<f64>,
}

impl ControlPoint {
    pub fn new(position: EcefPoint, rotation: UnitQuaternion<f64>) -> Self {
        ControlPoint {
            position,
            rotation,
            scale: Vector3::new(1.0, 1.0, 1.0),
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    pub fn camera_pose(&self) -> CameraPose {
        CameraPose {
            rotation_lsr: self.rotation_matrix(),
            eye: self.position,
        }
    }

    /// Local-to-world matrix: scale, then rotate, then translate.
    pub fn matrix(&self) -> nalgebra::Matrix4<f64> {
        let mut m = (self.rotation_matrix() * Matrix3::from_diagonal(&self.scale)).to_homogeneous();
        m.fixed_view_mut::<3, 1>(0, 3)
            .copy_from(&self.position.to_vector());
        m
    }
}

/// Unit quaternion of a rotation matrix.
pub(crate) fn quaternion_of(m: &Matrix3<f64>) -> UnitQuaternion<f64> {
    let q = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*m));
    UnitQuaternion::new_normalize(q.into_inner())
}

/// Converts a trajectory sample into a keyframe in ECEF.
pub fn pose_to_control_point(p: &SampledPose) -> ControlPoint {
    let position = WGS84.geodetic_to_ecef(&p.geodetic);
    let lsr = lsr_basis_at(p.geodetic.lon, p.geodetic.lat);
    let rotation = rotation_in_lsr(&rotation_from_posture(&p.posture), &lsr);
    ControlPoint::new(position, quaternion_of(&rotation))
}

/// Spherical interpolation along the shorter arc. Nearly parallel inputs
/// fall back to a normalized linear blend.
pub fn slerp(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>, u: f64) -> UnitQuaternion<f64> {
    let qa = a.as_ref().coords;
    let mut qb = b.as_ref().coords;
    let mut cos = qa.dot(&qb);
    if cos < 0.0 {
        qb = -qb;
        cos = -cos;
    }
    let blended = if cos > 1.0 - 1e-12 {
        qa * (1.0 - u) + qb * u
    } else {
        let theta = cos.acos();
        let s = theta.sin();
        qa * (((1.0 - u) * theta).sin() / s) + qb * ((u * theta).sin() / s)
    };
    UnitQuaternion::new_normalize(nalgebra::Quaternion::from(blended))
}

/// Time-keyed keyframes with interpolated lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct AnimationPath {
    keys: Vec<(f64, ControlPoint)>,
}

impl AnimationPath {
    pub fn with_key(time: f64, cp: ControlPoint) -> Result<Self> {
        if !time.is_finite() {
            return Err(Error::Domain("key time must be finite".into()));
        }
        Ok(AnimationPath {
            keys: vec![(time, cp)],
        })
    }

    /// Inserts a key, replacing any key at the same time.
    pub fn insert(&mut self, time: f64, cp: ControlPoint) -> Result<()> {
        if !time.is_finite() {
            return Err(Error::Domain("key time must be finite".into()));
        }
        match self.keys.binary_search_by(|(t, _)| t.total_cmp(&time)) {
            Ok(i) => self.keys[i].1 = cp,
            Err(i) => self.keys.insert(i, (time, cp)),
        }
        Ok(())
    }

    pub fn keys(&self) -> &[(f64, ControlPoint)] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn first_time(&self) -> f64 {
        self.keys[0].0
    }

    pub fn last_time(&self) -> f64 {
        self.keys[self.keys.len() - 1].0
    }

    pub fn period(&self) -> f64 {
        self.last_time() - self.first_time()
    }

    /// Keyframe at time `t`: the stored key when `t` is a key time,
    /// otherwise position and scale blended linearly and rotation by slerp.
    pub fn sample(&self, t: f64) -> Result<ControlPoint> {
        if !(t >= self.first_time() && t <= self.last_time()) {
            return Err(Error::Range(format!(
                "time {t} outside [{}, {}]",
                self.first_time(),
                self.last_time()
            )));
        }
        let i = self.keys.partition_point(|(kt, _)| *kt <= t);
        let (t0, a) = &self.keys[i - 1];
        if *t0 == t || i == self.keys.len() {
            return Ok(*a);
        }
        let (t1, b) = &self.keys[i];
        let u = (t - t0) / (t1 - t0);
        let pa = a.position.to_vector();
        let pb = b.position.to_vector();
        Ok(ControlPoint {
            position: EcefPoint::from_vector(pa + (pb - pa) * u),
            rotation: slerp(&a.rotation, &b.rotation, u),
            scale: a.scale + (b.scale - a.scale) * u,
        })
    }
}

/// Builds the animation path from time-sorted samples, one key per sample.
pub fn build_animation_path(samples: &[SampledPose]) -> Result<AnimationPath> {
    let Some(first) = samples.first() else {
        return Err(Error::Domain(
            "cannot build an animation path from no samples".into(),
        ));
    };
    if let Some(w) = samples
        .windows(2)
        .find(|w| w[1].time.partial_cmp(&w[0].time) != Some(std::cmp::Ordering::Greater))
    {
        return Err(Error::Domain(format!(
            "sample times must be strictly increasing ({} then {})",
            w[0].time, w[1].time
        )));
    }
    let mut path = AnimationPath::with_key(first.time, pose_to_control_point(first))?;
    path.keys.reserve(samples.len() - 1);
    for s in &samples[1..] {
        path.keys.push((s.time, pose_to_control_point(s)));
    }
    Ok(path)
}
