#![allow(dead_code)]

use std::path::Path;

use elbptop::{synth_generate, DatasetManifest, RunConfig, SynthSpec, WpcaSettings};
use elbptop_core::preprocess::{EvmParams, FrequencyUnits, TimParams};
use elbptop_core::{BlockGrid, CodeKind, DescriptorConfig, EncodingKind, NeighborSpec, PlaneSet};

pub fn small_spec() -> SynthSpec {
    SynthSpec { subjects: 4, clips_per_subject: 3, width: 32, height: 32, length: 8, ..SynthSpec::default() }
}

pub fn small_dataset(dir: &Path) -> DatasetManifest {
    synth_generate(&small_spec(), dir).unwrap()
}

pub fn descriptor(kind: CodeKind, r: f64, gap: f64) -> DescriptorConfig {
    DescriptorConfig {
        kind,
        neighbors: NeighborSpec::new(r, 8, gap).unwrap(),
        encoding: EncodingKind::U2,
        planes: PlaneSet::TOP,
        blocks: BlockGrid::new(2, 2, 1).unwrap(),
    }
}

/// Three descriptors, magnification and interpolation, small blocks.
pub fn small_config(cache: Option<&Path>) -> RunConfig {
    RunConfig {
        descriptors: vec![
            descriptor(CodeKind::Adlbp, 1.0, 0.0),
            descriptor(CodeKind::Lbp, 1.0, 0.0),
            descriptor(CodeKind::Rdlbp, 2.0, 1.0),
        ],
        evm: Some(EvmParams {
            alpha: 10.0,
            low: 0.05,
            high: 0.4,
            units: FrequencyUnits::NyquistFraction,
            frame_rate: None,
            lambda_c: 16.0,
            levels: 3,
        }),
        tim: Some(TimParams { target_length: 8 }),
        frame_size: None,
        wpca: WpcaSettings::default(),
        protocol: Default::default(),
        c_grid: vec![0.1, 1.0, 10.0],
        seed: 0,
        cache_dir: cache.map(Path::to_path_buf),
        standardize: false,
        renormalize_fused: false,
    }
}

/// Every file under `root` with its bytes, sorted by relative path.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
