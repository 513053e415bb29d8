//! WGS-84 ellipsoid and conversions between geodetic, Earth-centered
//! (ECEF) and local east-north-up coordinates.
//!
//! Angles cross this API in degrees and are converted to radians only
//! inside the computations.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iteration cap for the ECEF to geodetic inverse.
const MAX_INVERSE_ITERATIONS: usize = 50;

/// Latitude step (radians) below which the inverse iteration stops. The
/// fixed-point map contracts by roughly e², so the step has to be well
/// below the target accuracy for the returned latitude to be good to a
/// few 1e-9 m on the surface.
const INVERSE_TOLERANCE: f64 = 1e-14;

/// Inputs closer than this to the Earth's center are rejected by the inverse.
const MIN_CENTER_DISTANCE: f64 = 1.0;

/// A reference ellipsoid of revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    a: f64,
    f: f64,
    b: f64,
    e2: f64,
}

pub const WGS84: Ellipsoid = Ellipsoid::from_defining(6378137.0, 1.0 / 298.257223563);

impl Ellipsoid {
    const fn from_defining(a: f64, f: f64) -> Self {
        Ellipsoid {
            a,
            f,
            b: a * (1.0 - f),
            e2: 2.0 * f - f * f,
        }
    }

    /// Builds an ellipsoid from its semi-major axis (meters) and flattening.
    pub fn new(semi_major_axis: f64, flattening: f64) -> Result<Self> {
        if !(semi_major_axis.is_finite() && semi_major_axis > 0.0) {
            return Err(Error::Domain(format!(
                "semi-major axis must be positive, got {semi_major_axis}"
            )));
        }
        if !(flattening > 0.0 && flattening < 1.0) {
            return Err(Error::Domain(format!(
                "flattening must lie in (0, 1), got {flattening}"
            )));
        }
        Ok(Self::from_defining(semi_major_axis, flattening))
    }

    pub fn wgs84() -> Self {
        WGS84
    }

    /// Semi-major axis in meters.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Semi-minor axis in meters.
    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn flattening(&self) -> f64 {
        self.f
    }

    /// First eccentricity squared.
    pub fn e2(&self) -> f64 {
        self.e2
    }

    /// Radius of curvature in the prime vertical at geodetic latitude `lat`
    /// (degrees): `a / sqrt(1 - e² sin²φ)`.
    pub fn prime_vertical_radius(&self, lat: f64) -> Result<f64> {
        check_latitude(lat)?;
        Ok(self.prime_vertical_radius_rad(lat.to_radians()))
    }

    fn prime_vertical_radius_rad(&self, lat: f64) -> f64 {
        let s = lat.sin();
        self.a / (1.0 - self.e2 * s * s).sqrt()
    }

    /// Geodetic to ECEF.
    pub fn geodetic_to_ecef(&self, p: &GeodeticPoint) -> EcefPoint {
        let (lat, lon) = (p.lat.to_radians(), p.lon.to_radians());
        let v = self.prime_vertical_radius_rad(lat);
        let (slat, clat) = lat.sin_cos();
        let (slon, clon) = lon.sin_cos();
        EcefPoint {
            x: (v + p.h) * clat * clon,
            y: (v + p.h) * clat * slon,
            z: ((1.0 - self.e2) * v + p.h) * slat,
        }
    }

    /// ECEF to geodetic by fixed-point iteration on latitude.
    ///
    /// At the poles longitude is undefined; it is reported as 0 whenever
    /// `cos(lat) < 1e-12`.
    pub fn ecef_to_geodetic(&self, p: &EcefPoint) -> Result<GeodeticPoint> {
        let EcefPoint { x, y, z } = *p;
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Domain("non-finite ECEF coordinate".into()));
        }
        let r = (x * x + y * y + z * z).sqrt();
        if r < MIN_CENTER_DISTANCE {
            return Err(Error::Domain(format!(
                "point is {r} m from the Earth's center; geodetic coordinates are undefined"
            )));
        }

        let rho = x.hypot(y);
        let mut lat = z.atan2(rho * (1.0 - self.e2));
        let mut converged = false;
        for _ in 0..MAX_INVERSE_ITERATIONS {
            let v = self.prime_vertical_radius_rad(lat);
            let next = (z + self.e2 * v * lat.sin()).atan2(rho);
            let step = (next - lat).abs();
            lat = next;
            if step < INVERSE_TOLERANCE {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric(format!(
                "latitude iteration did not converge in {MAX_INVERSE_ITERATIONS} steps"
            )));
        }

        let (slat, clat) = lat.sin_cos();
        // Well conditioned at every latitude, unlike rho / cos(lat) - v.
        let h = rho * clat + z * slat - self.a * (1.0 - self.e2 * slat * slat).sqrt();
        let lon = if clat < 1e-12 {
            0.0
        } else {
            y.atan2(x).to_degrees()
        };
        Ok(GeodeticPoint {
            lon,
            lat: lat.to_degrees(),
            h,
        })
    }

    /// Offsets `d` in the local frame at `origin` and returns the ECEF result.
    pub fn lsr_to_ecef(&self, origin: &GeodeticPoint, d: &LsrVector) -> EcefPoint {
        let o = self.geodetic_to_ecef(origin).to_vector();
        let basis = lsr_basis_at(origin.lon, origin.lat);
        EcefPoint::from_vector(o + basis * d.to_vector())
    }
}

impl Default for Ellipsoid {
    fn default() -> Self {
        WGS84
    }
}

fn check_latitude(lat: f64) -> Result<()> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(Error::Domain(format!("latitude {lat} outside [-90, 90]")));
    }
    Ok(())
}

/// Longitude/latitude in degrees and height in meters above the ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticPoint {
    pub lon: f64,
    pub lat: f64,
    pub h: f64,
}

impl GeodeticPoint {
    pub fn new(lon: f64, lat: f64, h: f64) -> Result<Self> {
        let p = GeodeticPoint { lon, lat, h };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lon.is_finite() && self.lat.is_finite() && self.h.is_finite()) {
            return Err(Error::Domain("non-finite geodetic coordinate".into()));
        }
        if !(-180.0..=180.0).contains(&self.lon) {
            return Err(Error::Domain(format!(
                "longitude {} outside [-180, 180]",
                self.lon
            )));
        }
        check_latitude(self.lat)
    }
}

/// Earth-centered, Earth-fixed position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EcefPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EcefPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        EcefPoint { x, y, z }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        EcefPoint::new(v.x, v.y, v.z)
    }

    pub fn distance(&self, other: &EcefPoint) -> f64 {
        (self.to_vector() - other.to_vector()).norm()
    }
}

/// Offset in a local tangent frame: east, north and up, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LsrVector {
    pub u: f64,
    pub v_north: f64,
    pub w: f64,
}

impl LsrVector {
    pub const fn new(east: f64, north: f64, up: f64) -> Self {
        LsrVector {
            u: east,
            v_north: north,
            w: up,
        }
    }

    pub fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.u, self.v_north, self.w)
    }
}

/// Rotation whose columns are the local east, north and up unit vectors
/// expressed in ECEF at the given longitude/latitude (degrees).
pub fn lsr_basis_at(lon0: f64, lat0: f64) -> Matrix3<f64> {
    let (sl, cl) = lon0.to_radians().sin_cos();
    let (sp, cp) = lat0.to_radians().sin_cos();
    #[rustfmt::skip]
    let m = Matrix3::new(
        -sl, -sp * cl, cp * cl,
         cl, -sp * sl, cp * sl,
        0.0,       cp,      sp,
    );
    m
}
