//! Scene loading in the capture directory layout, plus a deterministic
//! synthetic scene generator with exact analytic ground truth.
//!
//! Layout on disk:
//!
//! ```text
//! <scene>/background/bg_0000_rgb.png  + bg_0000_depth.png
//! <scene>/test/t_00_rgb.png + t_00_depth.png + optional t_00_alpha.png
//! ```
//!
//! Depth is 16-bit grayscale PNG in millimeters (0 = unknown), RGB is 8-bit
//! color, alpha is 8-bit grayscale.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgcore::{
    load_depth_png, load_rgb_png, load_scalar_png, save_depth_png, save_rgb_png, save_scalar_png,
    DepthMap, RgbImage, ScalarMap, UNKNOWN_DEPTH,
};

/// One capture with a foreground present; ground truth is optional because
/// real test frames are only sometimes hand-labeled.
#[derive(Debug, Clone)]
pub struct TestFrame {
    pub rgb: RgbImage,
    pub depth: DepthMap,
    pub alpha_gt: Option<ScalarMap>,
}

/// A matting scene: pure-background captures plus test frames, all sharing
/// one resolution.
#[derive(Debug, Clone)]
pub struct Scene {
    backgrounds: Vec<(RgbImage, DepthMap)>,
    tests: Vec<TestFrame>,
}

impl Scene {
    pub fn new(backgrounds: Vec<(RgbImage, DepthMap)>, tests: Vec<TestFrame>) -> Result<Self> {
        let (w, h) = match backgrounds.first() {
            Some((rgb, _)) => rgb.dims(),
            None => {
                return Err(Error::InvalidData(
                    "a scene needs at least one background capture".into(),
                ))
            }
        };
        for (rgb, depth) in &backgrounds {
            if rgb.dims() != (w, h) || depth.dims() != (w, h) {
                return Err(Error::dims("scene backgrounds", (w, h), depth.dims()));
            }
        }
        for t in &tests {
            for dims in [Some(t.rgb.dims()), Some(t.depth.dims()), t.alpha_gt.as_ref().map(|a| a.dims())]
                .into_iter()
                .flatten()
            {
                if dims != (w, h) {
                    return Err(Error::dims("scene test frames", (w, h), dims));
                }
            }
        }
        Ok(Self { backgrounds, tests })
    }

    pub fn backgrounds(&self) -> &[(RgbImage, DepthMap)] {
        &self.backgrounds
    }

    pub fn tests(&self) -> &[TestFrame] {
        &self.tests
    }

    pub fn dims(&self) -> (usize, usize) {
        self.backgrounds[0].0.dims()
    }
}

/// Anti-aliased disk foreground, placed in pixel coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    /// Half-width in pixels of the fractional coverage band at the rim.
    pub aa_width: f64,
}

/// Parameters of a generated scene. `Default` is a desk-scale indoor setup:
/// a 3 m wall, a 1 m disk-shaped foreground, mild sensor noise and dropout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub bg_depth_mm: f64,
    pub bg_noise_std_mm: f64,
    pub fg_depth_mm: f64,
    pub fg_shape: DiskSpec,
    /// Fraction of depth pixels reported as unknown.
    pub dropout_rate: f64,
    pub n_backgrounds: usize,
    pub n_tests: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 7,
            width: 640,
            height: 480,
            bg_depth_mm: 3000.0,
            bg_noise_std_mm: 10.0,
            fg_depth_mm: 1000.0,
            fg_shape: DiskSpec {
                center_x: 320.0,
                center_y: 240.0,
                radius: 100.0,
                aa_width: 2.0,
            },
            dropout_rate: 0.05,
            n_backgrounds: 20,
            n_tests: 3,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::param("width/height", "must be positive"));
        }
        if !(self.bg_depth_mm.is_finite() && self.bg_depth_mm > 0.0) {
            return Err(Error::param("bg_depth_mm", "must be > 0"));
        }
        if !(self.fg_depth_mm.is_finite() && self.fg_depth_mm > 0.0) {
            return Err(Error::param("fg_depth_mm", "must be > 0"));
        }
        if self.fg_depth_mm >= self.bg_depth_mm {
            return Err(Error::param(
                "fg_depth_mm",
                format!(
                    "foreground at {} mm must be closer than the background at {} mm",
                    self.fg_depth_mm, self.bg_depth_mm
                ),
            ));
        }
        if !(self.bg_noise_std_mm.is_finite() && self.bg_noise_std_mm >= 0.0) {
            return Err(Error::param("bg_noise_std_mm", "must be >= 0"));
        }
        if !(self.dropout_rate >= 0.0 && self.dropout_rate < 1.0) {
            return Err(Error::param(
                "dropout_rate",
                format!("{} must lie in [0, 1)", self.dropout_rate),
            ));
        }
        if !(self.fg_shape.radius.is_finite() && self.fg_shape.radius > 0.0) {
            return Err(Error::param("fg_shape.radius", "must be > 0"));
        }
        if !(self.fg_shape.aa_width.is_finite() && self.fg_shape.aa_width >= 0.0) {
            return Err(Error::param("fg_shape.aa_width", "must be >= 0"));
        }
        if self.n_backgrounds == 0 {
            return Err(Error::param("n_backgrounds", "must be at least 1"));
        }
        Ok(())
    }

    /// Analytic disk coverage of the pixel centered at `(x + 0.5, y + 0.5)`:
    /// 1 inside `radius - aa_width`, 0 outside `radius + aa_width`, linear
    /// in the distance across the rim band.
    pub fn coverage(&self, x: usize, y: usize) -> f64 {
        let dx = x as f64 + 0.5 - self.fg_shape.center_x;
        let dy = y as f64 + 0.5 - self.fg_shape.center_y;
        let dist = (dx * dx + dy * dy).sqrt();
        let aa = self.fg_shape.aa_width;
        if aa == 0.0 {
            return if dist <= self.fg_shape.radius { 1.0 } else { 0.0 };
        }
        ((self.fg_shape.radius + aa - dist) / (2.0 * aa)).clamp(0.0, 1.0)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const ROLE_BACKGROUND: u64 = 0xB6;
const ROLE_TEST: u64 = 0x7E57;

/// One independent generator per image so content never depends on how many
/// images precede it or on evaluation order.
fn image_rng(seed: u64, role: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(splitmix64(seed ^ role).wrapping_add(index)))
}

const BG_COLOR: [f64; 3] = [0.2, 0.3, 0.4];
const FG_COLOR: [f64; 3] = [0.8, 0.5, 0.2];
const RGB_NOISE_STD: f64 = 0.01;

struct Renderer {
    depth_noise: Option<Normal<f64>>,
    rgb_noise: Normal<f64>,
    dropout_rate: f64,
}

impl Renderer {
    fn new(spec: &SynthSpec) -> Self {
        let depth_noise = (spec.bg_noise_std_mm > 0.0)
            .then(|| Normal::new(0.0, spec.bg_noise_std_mm).expect("validated std"));
        Self {
            depth_noise,
            rgb_noise: Normal::new(0.0, RGB_NOISE_STD).expect("constant std"),
            dropout_rate: spec.dropout_rate,
        }
    }

    /// Per-pixel draws happen in a fixed order (depth noise, dropout, three
    /// channel noises) so a frame's content is a pure function of its seed.
    fn pixel(&self, rng: &mut ChaCha8Rng, plane_mm: f64, base: [f64; 3]) -> (f32, [f32; 3]) {
        let noise = self.depth_noise.as_ref().map_or(0.0, |n| n.sample(rng));
        let mut depth = (plane_mm + noise).max(1.0) as f32;
        if rng.random::<f64>() < self.dropout_rate {
            depth = UNKNOWN_DEPTH;
        }
        let mut rgb = [0.0f32; 3];
        for (out, b) in rgb.iter_mut().zip(base) {
            *out = (b + self.rgb_noise.sample(rng)).clamp(0.0, 1.0) as f32;
        }
        (depth, rgb)
    }
}

/// Renders a deterministic scene: noisy background plane captures and test
/// frames compositing the disk foreground over a fresh background sample,
/// each with the exact analytic alpha as ground truth.
pub fn gen_synthetic_scene(spec: &SynthSpec) -> Result<Scene> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let renderer = Renderer::new(spec);

    let mut backgrounds = Vec::with_capacity(spec.n_backgrounds);
    for i in 0..spec.n_backgrounds {
        let mut rng = image_rng(spec.seed, ROLE_BACKGROUND, i as u64);
        let mut depth = Vec::with_capacity(w * h);
        let mut rgb = Vec::with_capacity(w * h * 3);
        for _ in 0..w * h {
            let (d, c) = renderer.pixel(&mut rng, spec.bg_depth_mm, BG_COLOR);
            depth.push(d);
            rgb.extend_from_slice(&c);
        }
        backgrounds.push((RgbImage::new(w, h, rgb)?, DepthMap::new(w, h, depth)?));
    }

    let mut tests = Vec::with_capacity(spec.n_tests);
    for i in 0..spec.n_tests {
        let mut rng = image_rng(spec.seed, ROLE_TEST, i as u64);
        let mut depth = Vec::with_capacity(w * h);
        let mut rgb = Vec::with_capacity(w * h * 3);
        let mut alpha = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let cov = spec.coverage(x, y);
                let plane = if cov > 0.5 { spec.fg_depth_mm } else { spec.bg_depth_mm };
                let base = [
                    cov * FG_COLOR[0] + (1.0 - cov) * BG_COLOR[0],
                    cov * FG_COLOR[1] + (1.0 - cov) * BG_COLOR[1],
                    cov * FG_COLOR[2] + (1.0 - cov) * BG_COLOR[2],
                ];
                let (d, c) = renderer.pixel(&mut rng, plane, base);
                depth.push(d);
                rgb.extend_from_slice(&c);
                alpha.push(cov as f32);
            }
        }
        tests.push(TestFrame {
            rgb: RgbImage::new(w, h, rgb)?,
            depth: DepthMap::new(w, h, depth)?,
            alpha_gt: Some(ScalarMap::new(w, h, alpha)?),
        });
    }

    Scene::new(backgrounds, tests)
}

fn scene_err(dir: &Path, reason: impl Into<String>) -> Error {
    Error::SceneLayout {
        dir: dir.to_path_buf(),
        reason: reason.into(),
    }
}

/// Ids of `<prefix>_<id>_rgb.png` files in `dir`, sorted, with every id
/// required to have its `_depth.png` sibling. Depth files without an RGB
/// sibling are rejected too.
fn paired_ids(dir: &Path, prefix: &str) -> Result<Vec<String>> {
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Read {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut rgb_ids = Vec::new();
    let mut depth_ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| Error::Read {
            path: dir.to_path_buf(),
            source,
        })?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(stem) = name.strip_prefix(prefix).and_then(|s| s.strip_prefix('_')) else {
            continue;
        };
        if let Some(id) = stem.strip_suffix("_rgb.png") {
            rgb_ids.push(id.to_owned());
        } else if let Some(id) = stem.strip_suffix("_depth.png") {
            depth_ids.push(id.to_owned());
        }
    }
    rgb_ids.sort_unstable();
    depth_ids.sort_unstable();
    for id in &rgb_ids {
        if depth_ids.binary_search(id).is_err() {
            return Err(scene_err(
                dir,
                format!("{prefix}_{id}_rgb.png has no matching {prefix}_{id}_depth.png"),
            ));
        }
    }
    for id in &depth_ids {
        if rgb_ids.binary_search(id).is_err() {
            return Err(scene_err(
                dir,
                format!("{prefix}_{id}_depth.png has no matching {prefix}_{id}_rgb.png"),
            ));
        }
    }
    Ok(rgb_ids)
}

fn check_scene_dims(
    dir: &Path,
    name: String,
    got: (usize, usize),
    scene: &mut Option<(usize, usize)>,
) -> Result<()> {
    match *scene {
        None => *scene = Some(got),
        Some(expect) if got != expect => {
            return Err(scene_err(
                dir,
                format!(
                    "{name} is {}x{} but the scene is {}x{}",
                    got.0, got.1, expect.0, expect.1
                ),
            ));
        }
        Some(_) => {}
    }
    Ok(())
}

/// Loads a scene from the capture layout. Test frames are optional, their
/// ground-truth alphas individually optional; every file must share the
/// scene resolution.
pub fn load_scene(dir: &Path) -> Result<Scene> {
    let bg_dir = dir.join("background");
    if !bg_dir.is_dir() {
        return Err(scene_err(dir, "missing background directory"));
    }
    let mut dims: Option<(usize, usize)> = None;

    let mut backgrounds = Vec::new();
    for id in paired_ids(&bg_dir, "bg")? {
        let rgb = load_rgb_png(&bg_dir.join(format!("bg_{id}_rgb.png")))?;
        let depth = load_depth_png(&bg_dir.join(format!("bg_{id}_depth.png")))?;
        check_scene_dims(dir, format!("bg_{id}_rgb.png"), rgb.dims(), &mut dims)?;
        check_scene_dims(dir, format!("bg_{id}_depth.png"), depth.dims(), &mut dims)?;
        backgrounds.push((rgb, depth));
    }
    if backgrounds.is_empty() {
        return Err(scene_err(dir, "background directory has no bg_*_rgb.png captures"));
    }

    let mut tests = Vec::new();
    let test_dir = dir.join("test");
    if test_dir.is_dir() {
        for id in paired_ids(&test_dir, "t")? {
            let rgb = load_rgb_png(&test_dir.join(format!("t_{id}_rgb.png")))?;
            let depth = load_depth_png(&test_dir.join(format!("t_{id}_depth.png")))?;
            check_scene_dims(dir, format!("t_{id}_rgb.png"), rgb.dims(), &mut dims)?;
            check_scene_dims(dir, format!("t_{id}_depth.png"), depth.dims(), &mut dims)?;
            let alpha_path = test_dir.join(format!("t_{id}_alpha.png"));
            let alpha_gt = if alpha_path.is_file() {
                let a = load_scalar_png(&alpha_path)?;
                check_scene_dims(dir, format!("t_{id}_alpha.png"), a.dims(), &mut dims)?;
                Some(a)
            } else {
                None
            };
            tests.push(TestFrame { rgb, depth, alpha_gt });
        }
    }
    Scene::new(backgrounds, tests)
}

/// Ids of the test frames as they appear on disk (and as `load_scene`
/// orders them), so callers can address single frames.
pub fn test_frame_ids(dir: &Path) -> Result<Vec<String>> {
    let test_dir = dir.join("test");
    if !test_dir.is_dir() {
        return Ok(Vec::new());
    }
    paired_ids(&test_dir, "t")
}

/// Writes a scene in the capture layout, creating directories as needed.
/// Backgrounds are numbered `bg_0000`…, test frames `t_00`….
pub fn save_scene(dir: &Path, scene: &Scene) -> Result<()> {
    let bg_dir = dir.join("background");
    let test_dir = dir.join("test");
    for d in [&bg_dir, &test_dir] {
        std::fs::create_dir_all(d).map_err(|source| Error::Write {
            path: d.clone(),
            source,
        })?;
    }
    for (i, (rgb, depth)) in scene.backgrounds().iter().enumerate() {
        save_rgb_png(rgb, &bg_dir.join(format!("bg_{i:04}_rgb.png")))?;
        save_depth_png(depth, &bg_dir.join(format!("bg_{i:04}_depth.png")))?;
    }
    for (i, t) in scene.tests().iter().enumerate() {
        save_rgb_png(&t.rgb, &test_dir.join(format!("t_{i:02}_rgb.png")))?;
        save_depth_png(&t.depth, &test_dir.join(format!("t_{i:02}_depth.png")))?;
        if let Some(a) = &t.alpha_gt {
            save_scalar_png(a, &test_dir.join(format!("t_{i:02}_alpha.png")))?;
        }
    }
    Ok(())
}

/// Ground-truth alphas keyed by frame id as written by [`save_scene`].
pub fn ground_truth_by_id(scene: &Scene) -> BTreeMap<String, &ScalarMap> {
    scene
        .tests()
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.alpha_gt.as_ref().map(|a| (format!("{i:02}"), a)))
        .collect()
}
