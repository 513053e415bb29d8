//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use flypath_core::camera::{rotation_from_posture, rotation_in_lsr, view_matrix_of};
use flypath_core::formats::{emit_geometry_file, emit_trajectory_kml, parse_geometry_file};
use flypath_core::playback::{format_dump, run_playback, Command, SimEvent};
use flypath_core::trajectory::{
    build_animation_path, ingest_flight, interpolate_trajectory, list_config_files,
    read_config_file,
};
use flypath_core::{
    lsr_basis_at, CameraPose, GeodeticPoint, PathPoint, Posture, SampleOrigin, SplineCurve, WGS84,
};
use nalgebra::{Matrix3, Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5EED_F11E;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn demo_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/demo_flight")
}

fn orthonormal_error(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).abs().max()
}

fn random_geodetic(rng: &mut ChaCha8Rng, max_h: f64) -> GeodeticPoint {
    GeodeticPoint {
        lon: rng.random_range(-180.0..=180.0),
        lat: rng.random_range(-90.0..=90.0),
        h: rng.random_range(-max_h..=max_h),
    }
}

fn random_posture(rng: &mut ChaCha8Rng) -> Posture {
    Posture {
        heading: rng.random_range(0.0..360.0),
        pitch: rng.random_range(-90.0..=90.0),
        roll: rng.random_range(-180.0..=180.0),
    }
}

fn surface_invariant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let started = Instant::now();
    let (a, b) = (WGS84.a(), WGS84.b());
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut p = random_geodetic(&mut rng, 0.0);
        p.h = 0.0;
        let e = WGS84.geodetic_to_ecef(&p);
        let lhs = (e.x * e.x + e.y * e.y) / (a * a) + e.z * e.z / (b * b);
        worst = worst.max((lhs - 1.0).abs());
    }
    let elapsed = started.elapsed();
    outcome(
        worst < 1e-9 && elapsed < Duration::from_secs(1),
        format!("max relative error {worst:.3e} (tol 1e-9), {elapsed:?} (limit 1 s)"),
    )
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = random_geodetic(&mut rng, 50_000.0);
        let e = WGS84.geodetic_to_ecef(&p);
        let back = match WGS84.ecef_to_geodetic(&e) {
            Ok(b) => b,
            Err(err) => return outcome(false, format!("inverse failed at {p:?}: {err}")),
        };
        let again = WGS84.geodetic_to_ecef(&back);
        worst = worst.max(again.distance(&e)).max((back.h - p.h).abs());
    }
    outcome(
        worst < 1e-8,
        format!("max error {worst:.3e} m (tol 1e-8 m)"),
    )
}

fn axis_cases() -> Outcome {
    let equator = WGS84.geodetic_to_ecef(&GeodeticPoint {
        lon: 0.0,
        lat: 0.0,
        h: 0.0,
    });
    let pole = WGS84.geodetic_to_ecef(&GeodeticPoint {
        lon: 0.0,
        lat: 90.0,
        h: 0.0,
    });
    let exact = equator.x == 6_378_137.0 && equator.y == 0.0 && equator.z == 0.0;
    let dz = (pole.z - 6_356_752.314245).abs();
    outcome(
        exact && dz < 1e-6,
        format!(
            "equator ({}, {}, {}), pole Z off by {dz:.3e} m (tol 1e-6 m)",
            equator.x, equator.y, equator.z
        ),
    )
}

fn find_span(knots: &[f64], degree: usize, t: f64) -> usize {
    let n = knots.len() - degree - 2;
    if t >= knots[n + 1] {
        return n;
    }
    (degree..=n).rev().find(|&i| knots[i] <= t).unwrap()
}

/// Cox-de Boor recursion for N_{i,p}(t) on the half-open convention,
/// with the last nonempty interval closed at the right end.
fn basis(knots: &[f64], i: usize, p: usize, t: f64, span: usize) -> f64 {
    if p == 0 {
        return if i == span { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let d1 = knots[i + p] - knots[i];
    if d1 > 0.0 {
        v += (t - knots[i]) / d1 * basis(knots, i, p - 1, t, span);
    }
    let d2 = knots[i + p + 1] - knots[i + 1];
    if d2 > 0.0 {
        v += (knots[i + p + 1] - t) / d2 * basis(knots, i + 1, p - 1, t, span);
    }
    v
}

fn spline_collocation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst_fit = 0.0f64;
    let mut worst_eval = 0.0f64;
    let mut evaluated = 0;
    for flight in 0..50 {
        let n = rng.random_range(4..=20);
        let mut lon = rng.random_range(-170.0..170.0);
        let mut lat = rng.random_range(-80.0..80.0);
        let mut pts = Vec::with_capacity(n);
        for _ in 0..n {
            lon += rng.random_range(0.001..0.05);
            lat += rng.random_range(-0.02..0.02);
            pts.push([lon, lat]);
        }
        let (curve, params) = match SplineCurve::interpolate(&pts) {
            Ok(c) => c,
            Err(e) => return outcome(false, format!("flight {flight}: {e}")),
        };
        for (t, p) in params.iter().zip(&pts) {
            let q = curve.de_boor(*t).unwrap();
            worst_fit = worst_fit.max((q[0] - p[0]).abs()).max((q[1] - p[1]).abs());
        }
        let per_flight = 20;
        for j in 0..per_flight {
            let t = if j == per_flight - 1 {
                1.0
            } else {
                rng.random_range(0.0..1.0)
            };
            let q = curve.de_boor(t).unwrap();
            let knots = curve.knots();
            let span = find_span(knots, curve.degree(), t);
            let mut oracle = [0.0, 0.0];
            for (i, c) in curve.control_points().iter().enumerate() {
                let w = basis(knots, i, curve.degree(), t, span);
                oracle[0] += w * c[0];
                oracle[1] += w * c[1];
            }
            worst_eval = worst_eval
                .max((q[0] - oracle[0]).abs())
                .max((q[1] - oracle[1]).abs());
            evaluated += 1;
        }
    }
    outcome(
        worst_fit < 1e-9 && worst_eval < 1e-12 && evaluated == 1000,
        format!(
            "collocation max {worst_fit:.3e} deg (tol 1e-9), de Boor vs basis sum max {worst_eval:.3e} (tol 1e-12) over {evaluated} samples"
        ),
    )
}

fn rotation_contracts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let (mut worst_r, mut worst_lsr, mut worst_eye) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let posture = random_posture(&mut rng);
        let place = random_geodetic(&mut rng, 20_000.0);
        let r = rotation_from_posture(&posture);
        let in_lsr = rotation_in_lsr(&r, &lsr_basis_at(place.lon, place.lat));
        worst_r = worst_r.max(orthonormal_error(&r));
        worst_lsr = worst_lsr.max(orthonormal_error(&in_lsr));
        let eye = WGS84.geodetic_to_ecef(&place);
        let vm = view_matrix_of(&CameraPose {
            rotation_lsr: in_lsr,
            eye,
        });
        let mapped = vm * Vector4::new(eye.x, eye.y, eye.z, 1.0);
        worst_eye = worst_eye.max(mapped.xyz().norm());
    }
    outcome(
        worst_r < 1e-12 && worst_lsr < 1e-12 && worst_eye < 1e-6,
        format!(
            "orthonormality {worst_r:.3e} / {worst_lsr:.3e} (tol 1e-12), eye to origin {worst_eye:.3e} m (tol 1e-6 m)"
        ),
    )
}

/// Reference geometry sample; its key set and order are the contract.
const REFERENCE_GEOMETRY: &str = "\
type: ossimEquDistCylProjection
origin_latitude:0.0
central_meridian: 0.0
pixel_scale_units: degrees
pixel_scale_xy: ( .133, .133 )
datum: WGE
tie_point_units: degrees
tie_point_xy: (-180.0, 90.0)
pixel_type: area
";

fn keys_of(text: &str) -> Vec<String> {
    text.lines()
        .filter_map(|l| l.split_once(':'))
        .map(|(k, _)| k.trim().to_string())
        .collect()
}

struct DemoFlight {
    points: Vec<PathPoint>,
    photos: Vec<flypath_core::PhotoMeta>,
}

fn load_demo() -> Result<DemoFlight, String> {
    let files = list_config_files(&demo_dir()).map_err(|e| e.to_string())?;
    let mut parsed = Vec::new();
    for f in &files {
        parsed.push((
            f.display().to_string(),
            read_config_file(f).map_err(|e| e.to_string())?,
        ));
    }
    let flight = ingest_flight(parsed).map_err(|e| e.to_string())?;
    Ok(DemoFlight {
        points: flight.iter().map(|r| r.point.clone()).collect(),
        photos: flight.into_iter().map(|r| r.photo).collect(),
    })
}

fn demo_reproduction() -> Outcome {
    let demo = match load_demo() {
        Ok(d) => d,
        Err(e) => return outcome(false, e),
    };
    let samples = interpolate_trajectory(&demo.points, 5).unwrap();
    let interpolated: Vec<_> = samples
        .iter()
        .filter(|s| s.origin == SampleOrigin::Interpolated)
        .copied()
        .collect();
    let xml = emit_trajectory_kml(&demo.points, &interpolated);
    let doc = match roxmltree::Document::parse(&xml) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("KML not well-formed: {e}")),
    };
    let refs: Vec<&str> = doc
        .descendants()
        .filter(|n| n.has_tag_name("Placemark"))
        .filter_map(|n| {
            n.children()
                .find(|c| c.has_tag_name("styleUrl"))
                .and_then(|c| c.text())
        })
        .collect();
    let inputs = refs.iter().filter(|r| **r == "#inputMark").count();
    let interps = refs.iter().filter(|r| **r == "#interpMark").count();
    let inputs_first = refs.iter().take(10).all(|r| *r == "#inputMark");

    let reference_keys = keys_of(REFERENCE_GEOMETRY);
    let mut sidecars_ok = 0;
    for (point, photo) in demo.points.iter().zip(&demo.photos) {
        let text = emit_geometry_file(photo, &point.geodetic()).unwrap();
        if keys_of(&text) == reference_keys && parse_geometry_file(&text).is_ok() {
            sidecars_ok += 1;
        }
    }
    outcome(
        demo.points.len() == 10 && refs.len() == 55 && inputs == 10 && interps == 45 && inputs_first && sidecars_ok == 10,
        format!(
            "{} inputs, {} placemarks ({inputs} input, {interps} interpolated), {sidecars_ok}/10 sidecars match the reference key order",
            demo.points.len(),
            refs.len()
        ),
    )
}

fn kml_fidelity() -> Outcome {
    let point = PathPoint {
        time: 0.0,
        lon: 121.48844,
        lat: 53.332649,
        height: 0.0,
        heading: 0.0,
        pitch: 0.0,
        roll: 0.0,
        photo_ref: "p.jpg".into(),
    };
    let xml = emit_trajectory_kml(&[point], &[]);
    let doc = match roxmltree::Document::parse(&xml) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("not well-formed: {e}")),
    };
    let coords: Vec<&str> = doc
        .descendants()
        .filter(|n| n.has_tag_name("coordinates"))
        .filter_map(|n| n.text())
        .collect();
    let root = doc.root_element();
    let ns_ok = root.tag_name().name() == "kml"
        && root.tag_name().namespace() == Some("http://www.opengis.net/kml/2.2")
        && root.lookup_namespace_uri(Some("gx")) == Some("http://www.google.com/kml/ext/2.2");
    let header_ok = xml.starts_with("<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    outcome(
        coords == ["121.48844,53.332649,0"] && ns_ok && header_ok,
        format!("coordinates {coords:?}, namespaces ok: {ns_ok}, header ok: {header_ok}"),
    )
}

/// Frames needed to reach the end: step k·dt until the end is reached,
/// then count that final clamped frame.
fn step_count_oracle(period: f64, dt: f64) -> usize {
    let mut frames = 1;
    let mut k = 0u64;
    loop {
        k += 1;
        frames += 1;
        if k as f64 * dt >= period - 1e-9 * period.max(1.0) {
            return frames;
        }
    }
}

fn playback_determinism() -> Outcome {
    let demo = match load_demo() {
        Ok(d) => d,
        Err(e) => return outcome(false, e),
    };
    let samples = interpolate_trajectory(&demo.points, 5).unwrap();
    let path = build_animation_path(&samples).unwrap();
    let script = [SimEvent::new(0, Command::Start).unwrap()];
    let fps = 30;
    let first = run_playback(&path, &script, fps).unwrap();
    let second = run_playback(&path, &script, fps).unwrap();
    let identical = format_dump(&first) == format_dump(&second);
    let formula = (path.period() * 30.0).floor() as usize + 1;
    let oracle = step_count_oracle(path.period(), 1.0 / f64::from(fps));

    let (mut worst_rigid, mut worst_offset) = (0.0f64, 0.0f64);
    let mut bottom_ok = true;
    for r in &first {
        let m = Matrix4::from_row_slice(&r.view_matrix);
        let block: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into();
        worst_rigid = worst_rigid.max(orthonormal_error(&block));
        bottom_ok &= m[(3, 0)] == 0.0 && m[(3, 1)] == 0.0 && m[(3, 2)] == 0.0 && m[(3, 3)] == 1.0;
        let expected = path.sample(r.sim_time).unwrap().position;
        worst_offset = worst_offset.max(expected.distance(&r.eye_ecef));
    }
    outcome(
        first.len() == formula && first.len() == oracle && identical && bottom_ok && worst_rigid < 1e-10 && worst_offset < 1e-6,
        format!(
            "{} records (formula {formula}, oracle {oracle}), identical dumps: {identical}, rigidity {worst_rigid:.3e} (tol 1e-10), eye off path {worst_offset:.3e} m (tol 1e-6 m)",
            first.len()
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let criteria: [Criterion; 8] = [
        ("geodesy surface invariant", surface_invariant),
        ("geodesy round trip", round_trip),
        ("geodesy axis cases", axis_cases),
        ("spline collocation and evaluation", spline_collocation),
        ("rotation and view contracts", rotation_contracts),
        ("demo flight reproduction", demo_reproduction),
        ("KML placemark fidelity", kml_fidelity),
        ("playback determinism and shape", playback_determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!(
            "{} criterion {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    let elapsed = started.elapsed();
    let fast = elapsed < Duration::from_secs(30);
    if !fast {
        failures += 1;
    }
    println!(
        "{} suite runtime: {elapsed:?} (limit 30 s)",
        if fast { "PASS" } else { "FAIL" }
    );
    println!(
        "acceptance: {} of {} checks passed",
        criteria.len() + 1 - failures,
        criteria.len() + 1
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
