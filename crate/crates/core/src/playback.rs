//! Headless, fixed-timestep playback of an animation path.
//!
//! Each frame runs three traversals in order: scripted events are applied,
//! simulation time advances and the current keyframe is sampled, then a
//! frame record carrying the eye position and view matrix is produced.

use std::fmt::Write as _;

use crate::camera::view_matrix_of;
use crate::error::{Error, Result};
use crate::geodesy::{EcefPoint, GeodeticPoint, WGS84};
use crate::trajectory::{AnimationPath, ControlPoint};

pub const DEFAULT_FPS: u32 = 30;

/// Upper bound on frames in one run, so a vanishing rate cannot hang it.
pub const MAX_FRAMES: u64 = 50_000_000;

/// Relative slack within which simulation time snaps to the path end.
const END_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Idle,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Start,
    Pause,
    Stop,
    Seek(f64),
    SetRate(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEvent {
    pub at_frame: u64,
    pub command: Command,
}

impl SimEvent {
    pub fn new(at_frame: u64, command: Command) -> Result<Self> {
        match command {
            Command::SetRate(r) if !(r.is_finite() && r > 0.0) => {
                Err(Error::validation("rate", format!("{r} must be positive")))
            }
            Command::Seek(t) if !t.is_finite() => {
                Err(Error::validation("seek", "target must be finite"))
            }
            _ => Ok(SimEvent { at_frame, command }),
        }
    }
}

/// One rendered frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub sim_time: f64,
    pub eye_geodetic: GeodeticPoint,
    pub eye_ecef: EcefPoint,
    /// View matrix, row-major.
    pub view_matrix: [f64; 16],
}

impl FrameRecord {
    /// Space-separated dump line (without the line break).
    pub fn to_line(&self) -> String {
        let mut fields = vec![
            self.frame_index.to_string(),
            format_g12(self.sim_time),
            format_g12(self.eye_geodetic.lon),
            format_g12(self.eye_geodetic.lat),
            format_g12(self.eye_geodetic.h),
            format_g12(self.eye_ecef.x),
            format_g12(self.eye_ecef.y),
            format_g12(self.eye_ecef.z),
        ];
        fields.extend(self.view_matrix.iter().map(|&v| format_g12(v)));
        fields.join(" ")
    }
}

/// Frame dump text: one line per record, LF endings.
pub fn format_dump(records: &[FrameRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(out, "{}", r.to_line());
    }
    out
}

/// Formats with 12 significant digits in the style of C's `%.12g`.
/// Negative zero prints as `0`.
pub fn format_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Mutable playback state, confined to one run.
#[derive(Debug, Clone)]
pub struct SimState<'a> {
    path: &'a AnimationPath,
    mode: Mode,
    paused: bool,
    sim_time: f64,
    rate: f64,
    frame_index: u64,
    current: Option<ControlPoint>,
    // sim_time = anchor_time + steps * dt * rate; re-anchored on every
    // seek, pause or rate change so long runs do not accumulate drift
    anchor_time: f64,
    steps: u64,
    // set on the frame a start or seek is applied: that frame shows the
    // new time without advancing
    hold: bool,
    // set when the end of the path was reached during this frame
    ended: bool,
}

impl<'a> SimState<'a> {
    pub fn new(path: &'a AnimationPath) -> Self {
        SimState {
            path,
            mode: Mode::Idle,
            paused: false,
            sim_time: path.first_time(),
            rate: 1.0,
            frame_index: 0,
            current: None,
            anchor_time: path.first_time(),
            steps: 0,
            hold: false,
            ended: false,
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_paused(&self) -> bool {
        self.paused
    }

    pub fn sim_time(&self) -> f64 {
        self.sim_time
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn current_control(&self) -> Option<&ControlPoint> {
        self.current.as_ref()
    }

    fn reanchor(&mut self, t: f64) {
        self.sim_time = t;
        self.anchor_time = t;
        self.steps = 0;
    }

    fn finish(&mut self) {
        self.reanchor(self.path.last_time());
        self.mode = Mode::Idle;
        self.paused = false;
        self.ended = true;
    }

    fn at_end(&self, t: f64) -> bool {
        t >= self.path.last_time() - END_SNAP * self.path.period().max(1.0)
    }

    /// Applies due commands in order.
    pub fn event_traversal(&mut self, due: &[SimEvent]) {
        for ev in due {
            match ev.command {
                Command::Start => match self.mode {
                    Mode::Idle => {
                        self.mode = Mode::Simulation;
                        self.paused = false;
                        self.ended = false;
                        self.reanchor(self.path.first_time());
                        self.hold = true;
                        if self.path.period() == 0.0 {
                            self.finish();
                        }
                    }
                    Mode::Simulation if self.paused => {
                        self.paused = false;
                        self.reanchor(self.sim_time);
                    }
                    Mode::Simulation => {}
                },
                Command::Pause => {
                    if self.mode == Mode::Simulation {
                        self.paused = true;
                        self.reanchor(self.sim_time);
                    }
                }
                Command::Stop => {
                    self.mode = Mode::Idle;
                    self.paused = false;
                    self.hold = false;
                    self.ended = false;
                }
                Command::Seek(t) => {
                    if self.mode == Mode::Simulation {
                        let t = t.clamp(self.path.first_time(), self.path.last_time());
                        if self.at_end(t) {
                            self.finish();
                        } else {
                            self.reanchor(t);
                            self.hold = true;
                        }
                    }
                }
                Command::SetRate(r) => {
                    if r.is_finite() && r > 0.0 {
                        self.reanchor(self.sim_time);
                        self.rate = r;
                    }
                }
            }
        }
    }

    /// Advances simulation time by `dt` seconds at the current rate and
    /// samples the path.
    pub fn update_traversal(&mut self, dt: f64) -> Result<()> {
        if self.mode == Mode::Simulation && !self.paused && !self.hold {
            self.steps += 1;
            let t = self.anchor_time + self.steps as f64 * dt * self.rate;
            if self.at_end(t) {
                self.finish();
            } else {
                self.sim_time = t;
            }
        }
        self.hold = false;
        if self.mode == Mode::Simulation || self.ended {
            self.current = Some(self.path.sample(self.sim_time)?);
        }
        Ok(())
    }

    /// Produces the record for the current keyframe.
    pub fn render_traversal(&self) -> Result<FrameRecord> {
        let cp = self
            .current
            .ok_or_else(|| Error::State("nothing to render before the first update".into()))?;
        let vm = view_matrix_of(&cp.camera_pose());
        let mut view_matrix = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                view_matrix[4 * r + c] = vm[(r, c)];
            }
        }
        Ok(FrameRecord {
            frame_index: self.frame_index,
            sim_time: self.sim_time,
            eye_geodetic: WGS84.ecef_to_geodetic(&cp.position)?,
            eye_ecef: cp.position,
            view_matrix,
        })
    }

    /// One frame: events, update, render. A record is returned while
    /// simulating and on the frame the end of the path is reached.
    pub fn frame(&mut self, due: &[SimEvent], dt: f64) -> Result<Option<FrameRecord>> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!("frame step {dt} must be positive")));
        }
        self.event_traversal(due);
        self.update_traversal(dt)?;
        let record = if self.mode == Mode::Simulation || self.ended {
            Some(self.render_traversal()?)
        } else {
            None
        };
        self.ended = false;
        self.frame_index += 1;
        Ok(record)
    }
}

fn check_sorted(script: &[SimEvent]) -> Result<()> {
    match script
        .windows(2)
        .position(|w| w[1].at_frame < w[0].at_frame)
    {
        Some(i) => Err(Error::validation(
            "script",
            format!(
                "event {} at frame {} precedes the previous event",
                i + 2,
                script[i + 1].at_frame
            ),
        )),
        None => Ok(()),
    }
}

/// Runs `script` against `path` at `fps` frames per second.
///
/// The loop ends once playback is idle (or paused) with no events left.
pub fn run_playback(
    path: &AnimationPath,
    script: &[SimEvent],
    fps: u32,
) -> Result<Vec<FrameRecord>> {
    if fps == 0 {
        return Err(Error::Domain("fps must be at least 1".into()));
    }
    check_sorted(script)?;
    let dt = 1.0 / f64::from(fps);
    let mut state = SimState::new(path);
    let mut records = Vec::new();
    let mut next = 0;
    loop {
        let frame = state.frame_index();
        if frame >= MAX_FRAMES {
            return Err(Error::State(format!(
                "playback exceeded {MAX_FRAMES} frames"
            )));
        }
        let start = next;
        while next < script.len() && script[next].at_frame <= frame {
            next += 1;
        }
        if let Some(r) = state.frame(&script[start..next], dt)? {
            records.push(r);
        }
        if next == script.len() && (state.mode() == Mode::Idle || state.is_paused()) {
            break;
        }
        if state.mode() == Mode::Idle && next < script.len() {
            // skip idle frames without events
            let target = script[next].at_frame;
            if target > state.frame_index {
                state.frame_index = target;
            }
        }
    }
    Ok(records)
}

/// Parses an event script: lines `frame=<n> cmd=<command>`, where the
/// command is `start`, `pause`, `stop`, `seek:<t>` or `rate:<r>`. Lines
/// starting with `#` and blank lines are skipped; frames must not decrease.
pub fn parse_script(text: &str) -> Result<Vec<SimEvent>> {
    let mut events: Vec<SimEvent> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        let (Some(frame), Some(cmd), 2) = (
            parts.first().and_then(|p| p.strip_prefix("frame=")),
            parts.get(1).and_then(|p| p.strip_prefix("cmd=")),
            parts.len(),
        ) else {
            return Err(Error::parse(
                line,
                format!("expected `frame=<n> cmd=<command>`, got {trimmed:?}"),
            ));
        };
        let at_frame: u64 = frame
            .parse()
            .map_err(|_| Error::parse(line, format!("malformed frame index {frame:?}")))?;
        let number = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line, format!("malformed number {s:?}")))
        };
        let command = match cmd.split_once(':') {
            None if cmd == "start" => Command::Start,
            None if cmd == "pause" => Command::Pause,
            None if cmd == "stop" => Command::Stop,
            Some(("seek", t)) => Command::Seek(number(t)?),
            Some(("rate", r)) => Command::SetRate(number(r)?),
            _ => return Err(Error::parse(line, format!("unknown command {cmd:?}"))),
        };
        let event =
            SimEvent::new(at_frame, command).map_err(|e| Error::parse(line, e.to_string()))?;
        if let Some(prev) = events.last() {
            if at_frame < prev.at_frame {
                return Err(Error::parse(
                    line,
                    format!(
                        "frame {at_frame} comes after frame {}; events must be sorted",
                        prev.at_frame
                    ),
                ));
            }
        }
        events.push(event);
    }
    Ok(events)
}
