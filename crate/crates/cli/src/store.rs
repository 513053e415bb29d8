//! The flight file: ingested records and their smoothed samples, stored as
//! pretty-printed JSON with a fixed key order.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use flypath_core::trajectory::{build_animation_path, interpolate_trajectory};
use flypath_core::{AnimationPath, FlightRecord, PathPoint, SampleOrigin, SampledPose};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightStore {
    pub format_version: u32,
    pub samples_per_segment: usize,
    pub records: Vec<FlightRecord>,
    pub samples: Vec<SampledPose>,
}

impl FlightStore {
    pub fn build(records: Vec<FlightRecord>, samples_per_segment: usize) -> Result<Self> {
        let points: Vec<PathPoint> = records.iter().map(|r| r.point.clone()).collect();
        let samples = interpolate_trajectory(&points, samples_per_segment)?;
        Ok(FlightStore {
            format_version: FORMAT_VERSION,
            samples_per_segment,
            records,
            samples,
        })
    }

    pub fn points(&self) -> Vec<PathPoint> {
        self.records.iter().map(|r| r.point.clone()).collect()
    }

    pub fn interpolated(&self) -> Vec<SampledPose> {
        self.samples
            .iter()
            .filter(|s| s.origin == SampleOrigin::Interpolated)
            .copied()
            .collect()
    }

    pub fn animation_path(&self) -> Result<AnimationPath> {
        Ok(build_animation_path(&self.samples)?)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.format_version == FORMAT_VERSION,
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            self.format_version
        );
        let n = self.records.len();
        ensure!(n >= 2, "a flight needs at least 2 records, found {n}");
        for (i, r) in self.records.iter().enumerate() {
            r.point.validate().with_context(|| format!("record {i}"))?;
            r.photo.validate().with_context(|| format!("record {i}"))?;
        }
        if let Some(w) = self
            .records
            .windows(2)
            .find(|w| w[1].point.time <= w[0].point.time)
        {
            bail!(
                "record times must increase ({} then {})",
                w[0].point.time,
                w[1].point.time
            );
        }
        let expected = n + (n - 1) * self.samples_per_segment;
        ensure!(
            self.samples.len() == expected,
            "expected {expected} samples for {n} records at {} per segment, found {}",
            self.samples_per_segment,
            self.samples.len()
        );
        if let Some(w) = self.samples.windows(2).find(|w| w[1].time <= w[0].time) {
            bail!(
                "sample times must increase ({} then {})",
                w[0].time,
                w[1].time
            );
        }
        let step = self.samples_per_segment + 1;
        for (i, s) in self.samples.iter().enumerate() {
            let is_input = i % step == 0;
            ensure!(
                (s.origin == SampleOrigin::Input) == is_input,
                "sample {i} has the wrong origin"
            );
            if is_input {
                let p = &self.records[i / step].point;
                ensure!(
                    s.time == p.time && s.geodetic == p.geodetic() && s.posture == p.posture(),
                    "sample {i} does not match record {}",
                    i / step
                );
            }
            s.geodetic
                .validate()
                .with_context(|| format!("sample {i}"))?;
            s.posture
                .validate()
                .with_context(|| format!("sample {i}"))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let store: FlightStore = serde_json::from_str(text)?;
        store.validate()?;
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read flight file {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("invalid flight file {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).with_context(|| format!("cannot write {}", path.display()))
    }
}
