//! Text artifacts: the geometry sidecar that places a photograph on the
//! globe, and the KML document of trajectory marks.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geodesy::GeodeticPoint;
use crate::kv;
use crate::trajectory::{PathPoint, PhotoMeta, SampleOrigin, SampledPose};

pub const PROJECTION_TAG: &str = "ossimEquDistCylProjection";
pub const DATUM_TAG: &str = "WGE";
pub const DEGREES: &str = "degrees";
pub const PIXEL_TYPE_AREA: &str = "area";

/// Geometry sidecar keys in emission order.
pub const GEOMETRY_KEYS: [&str; 9] = [
    "type",
    "origin_latitude",
    "central_meridian",
    "pixel_scale_units",
    "pixel_scale_xy",
    "datum",
    "tie_point_units",
    "tie_point_xy",
    "pixel_type",
];

pub const INPUT_STYLE_ID: &str = "inputMark";
pub const INTERP_STYLE_ID: &str = "interpMark";
pub const INPUT_ICON_HREF: &str = "icons/red-dot.png";
pub const INTERP_ICON_HREF: &str = "icons/green-dot.png";

const KML_NAMESPACE: &str = "http://www.opengis.net/kml/2.2";
const GX_NAMESPACE: &str = "http://www.google.com/kml/ext/2.2";
const COORDINATE_DECIMALS: usize = 6;

/// Contents of a geometry sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryHeader {
    pub projection: String,
    pub origin_latitude: f64,
    pub central_meridian: f64,
    pub pixel_scale_units: String,
    pub pixel_scale_xy: (f64, f64),
    pub datum: String,
    pub tie_point_units: String,
    /// Upper-left corner as (lon, lat).
    pub tie_point_xy: (f64, f64),
    pub pixel_type: String,
}

impl GeometryHeader {
    /// Header for a photograph centred on `center`.
    pub fn for_photo(meta: &PhotoMeta, center: &GeodeticPoint) -> Result<Self> {
        meta.validate()?;
        let (sx, sy) = meta.pixel_scale_deg;
        let header = GeometryHeader {
            projection: PROJECTION_TAG.into(),
            origin_latitude: 0.0,
            central_meridian: 0.0,
            pixel_scale_units: DEGREES.into(),
            pixel_scale_xy: (sx, sy),
            datum: DATUM_TAG.into(),
            tie_point_units: DEGREES.into(),
            tie_point_xy: (
                center.lon - f64::from(meta.width_px) * sx / 2.0,
                center.lat + f64::from(meta.height_px) * sy / 2.0,
            ),
            pixel_type: PIXEL_TYPE_AREA.into(),
        };
        header.validate()?;
        Ok(header)
    }

    pub fn validate(&self) -> Result<()> {
        let (sx, sy) = self.pixel_scale_xy;
        if !(sx > 0.0 && sy > 0.0 && sx.is_finite() && sy.is_finite()) {
            return Err(Error::validation(
                "pixel_scale_xy",
                format!("({sx}, {sy}) must be positive"),
            ));
        }
        let (lon, lat) = self.tie_point_xy;
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(Error::validation(
                "tie_point_xy",
                format!("({lon}, {lat}) outside the lon/lat range"),
            ));
        }
        if !(self.origin_latitude.is_finite() && self.central_meridian.is_finite()) {
            return Err(Error::validation("origin", "must be finite"));
        }
        Ok(())
    }

    /// Serializes as `key: value` lines with LF endings.
    pub fn to_text(&self) -> String {
        let values = [
            self.projection.clone(),
            format_decimal(self.origin_latitude),
            format_decimal(self.central_meridian),
            self.pixel_scale_units.clone(),
            format_pair(self.pixel_scale_xy),
            self.datum.clone(),
            self.tie_point_units.clone(),
            format_pair(self.tie_point_xy),
            self.pixel_type.clone(),
        ];
        let mut out = String::new();
        for (key, value) in GEOMETRY_KEYS.iter().zip(values) {
            let _ = writeln!(out, "{key}: {value}");
        }
        out
    }
}

/// Sidecar text for a photograph centred on `center`.
pub fn emit_geometry_file(meta: &PhotoMeta, center: &GeodeticPoint) -> Result<String> {
    Ok(GeometryHeader::for_photo(meta, center)?.to_text())
}

/// Parses sidecar text. All nine keys are required and no others allowed.
pub fn parse_geometry_file(text: &str) -> Result<GeometryHeader> {
    let entries = kv::parse(text)?;
    if let Some(e) = entries
        .iter()
        .find(|e| !GEOMETRY_KEYS.contains(&e.key.as_str()))
    {
        return Err(Error::parse(e.line, format!("unknown key \"{}\"", e.key)));
    }
    let text_of = |key: &str| kv::require(&entries, key).map(|e| e.value.clone());
    let pair_of = |key: &str| kv::require(&entries, key).and_then(parse_pair);
    let header = GeometryHeader {
        projection: text_of("type")?,
        origin_latitude: kv::require(&entries, "origin_latitude")?.number()?,
        central_meridian: kv::require(&entries, "central_meridian")?.number()?,
        pixel_scale_units: text_of("pixel_scale_units")?,
        pixel_scale_xy: pair_of("pixel_scale_xy")?,
        datum: text_of("datum")?,
        tie_point_units: text_of("tie_point_units")?,
        tie_point_xy: pair_of("tie_point_xy")?,
        pixel_type: text_of("pixel_type")?,
    };
    header.validate()?;
    Ok(header)
}

fn parse_pair(e: &kv::Entry) -> Result<(f64, f64)> {
    let malformed = || {
        Error::parse(
            e.line,
            format!("{}: expected \"(x, y)\", got {:?}", e.key, e.value),
        )
    };
    let inner = e
        .value
        .strip_prefix('(')
        .and_then(|v| v.strip_suffix(')'))
        .ok_or_else(malformed)?;
    let (x, y) = inner.split_once(',').ok_or_else(malformed)?;
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().map_err(|_| malformed())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(malformed())
        }
    };
    Ok((num(x)?, num(y)?))
}

/// Shortest round-trip decimal, always with a fractional part.
fn format_decimal(x: f64) -> String {
    let s = format!("{x}");
    if s.contains('.') {
        s
    } else {
        s + ".0"
    }
}

fn format_pair((x, y): (f64, f64)) -> String {
    format!("({}, {})", format_decimal(x), format_decimal(y))
}

/// Fixed six decimals with trailing zeros (and a bare point) removed.
pub fn format_coordinate(x: f64) -> String {
    let s = format!("{x:.COORDINATE_DECIMALS$}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmlStyle {
    pub id: String,
    pub icon_href: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmlPlacemark {
    pub style_ref: String,
    pub lon: f64,
    pub lat: f64,
    pub alt: f64,
}

/// A KML document of styled point marks.
#[derive(Debug, Clone, PartialEq)]
pub struct KmlTrajectoryDoc {
    pub styles: Vec<KmlStyle>,
    pub placemarks: Vec<KmlPlacemark>,
}

impl KmlTrajectoryDoc {
    /// Marks for a flight: inputs first, then interpolated samples, each in
    /// the order given.
    pub fn from_flight(inputs: &[PathPoint], interpolated: &[SampledPose]) -> Self {
        let styles = vec![
            KmlStyle {
                id: INPUT_STYLE_ID.into(),
                icon_href: INPUT_ICON_HREF.into(),
            },
            KmlStyle {
                id: INTERP_STYLE_ID.into(),
                icon_href: INTERP_ICON_HREF.into(),
            },
        ];
        let mark = |style: &str, p: &GeodeticPoint| KmlPlacemark {
            style_ref: style.into(),
            lon: p.lon,
            lat: p.lat,
            alt: p.h,
        };
        let placemarks = inputs
            .iter()
            .map(|p| mark(INPUT_STYLE_ID, &p.geodetic()))
            .chain(interpolated.iter().map(|s| {
                let style = match s.origin {
                    SampleOrigin::Input => INPUT_STYLE_ID,
                    SampleOrigin::Interpolated => INTERP_STYLE_ID,
                };
                mark(style, &s.geodetic)
            }))
            .collect();
        KmlTrajectoryDoc { styles, placemarks }
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.placemarks {
            if !self.styles.iter().any(|s| s.id == p.style_ref) {
                return Err(Error::validation(
                    "styleUrl",
                    format!("undefined style \"{}\"", p.style_ref),
                ));
            }
        }
        Ok(())
    }

    pub fn to_xml(&self) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(out, "<kml xmlns=\"{KML_NAMESPACE}\"");
        let _ = writeln!(out, "  xmlns:gx=\"{GX_NAMESPACE}\">");
        out.push_str("  <Document>\n");
        for s in &self.styles {
            let _ = writeln!(out, "    <Style id=\"{}\">", escape(&s.id));
            out.push_str("      <IconStyle>\n");
            let _ = writeln!(
                out,
                "        <Icon><href>{}</href></Icon>",
                escape(&s.icon_href)
            );
            out.push_str("      </IconStyle>\n");
            out.push_str("    </Style>\n");
        }
        for p in &self.placemarks {
            out.push_str("    <Placemark>\n");
            let _ = writeln!(out, "      <styleUrl>#{}</styleUrl>", escape(&p.style_ref));
            out.push_str("      <Point>\n");
            let _ = writeln!(
                out,
                "        <coordinates>{},{},{}</coordinates>",
                format_coordinate(p.lon),
                format_coordinate(p.lat),
                format_coordinate(p.alt)
            );
            out.push_str("      </Point>\n");
            out.push_str("    </Placemark>\n");
        }
        out.push_str("  </Document>\n");
        out.push_str("</kml>\n");
        out
    }
}

/// KML text for a flight's inputs and interpolated samples.
pub fn emit_trajectory_kml(inputs: &[PathPoint], interpolated: &[SampledPose]) -> String {
    KmlTrajectoryDoc::from_flight(inputs, interpolated).to_xml()
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}
