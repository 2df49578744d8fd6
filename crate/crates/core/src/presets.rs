//! Named two-object scenes: 96 frames, objects sharp near frames 20 and 70.
//!
//! Sets 1 and 2 use rectangular devices (a handset and an interface box) on
//! a uniform absorbing background. Sets 3 to 6 use small round lamps, some
//! with cooler holders below them; set 3 also has a cooler band across the
//! top of the background. Every probed object is a single-pixel hot spot at
//! the object's maximum temperature, slightly hotter than the body around
//! it, so the reading depends on how well the optics resolve it.

use crate::optics::airy_diameter_from_f_number;
use crate::simulate::{SceneObject, SceneSpec, Shape, DEFAULT_NOISE_STD};

pub const PRESET_NAMES: [&str; 6] = [
    "set1_phone_interface",
    "set2_phone_interface_close",
    "set3_bulbs_split_background",
    "set4_bulbs_white_background",
    "set5_bulbs_no_holders",
    "set6_bulbs_black_background",
];

pub const FRAMES: usize = 96;
pub const WIDTH: usize = 160;
pub const HEIGHT: usize = 120;
pub const BLUR_SLOPE: f64 = 1.5;
pub const NEAR_FOCUS: usize = 20;
pub const FAR_FOCUS: usize = 70;

/// LWIR camera behind the presets: 10 μm light, f/0.95, 17 μm pixels.
pub const WAVELENGTH: f64 = 10e-6;
pub const F_NUMBER: f64 = 0.95;
pub const PIXEL_PITCH: f64 = 17e-6;

/// Hot spot temperature above the body carrying it, °C.
pub const HOT_SPOT_RISE: f64 = 2.0;
const HOLDER_TEMP: f64 = 30.0;

/// Radius of the in-focus Airy disc, in pixels.
pub fn in_focus_psf_radius() -> f64 {
    let d = airy_diameter_from_f_number(WAVELENGTH, F_NUMBER).expect("constants are positive");
    d / 2.0 / PIXEL_PITCH
}

fn rect(x: f64, y: f64, width: f64, height: f64, temp: f64, focus_index: usize) -> SceneObject {
    SceneObject {
        shape: Shape::Rect {
            x,
            y,
            width,
            height,
        },
        temp,
        focus_index,
        probe: false,
    }
}

fn hot_spot(cx: f64, cy: f64, temp: f64, focus_index: usize) -> SceneObject {
    SceneObject {
        shape: Shape::Disc {
            cx,
            cy,
            radius: 0.5,
        },
        temp,
        focus_index,
        probe: true,
    }
}

/// A `w`×`h` device centred on `(cx, cy)`, optionally mounted in a larger
/// case whose temperature sets the device's local contrast.
fn device(cx: f64, cy: f64, w: f64, h: f64, peak: f64, case: Option<f64>, focus: usize) -> Vec<SceneObject> {
    let mut out = Vec::new();
    if let Some(t) = case {
        out.push(rect(cx - 12.0, cy - 8.0, 24.0, 16.0, t, focus));
    }
    let (x, y) = ((cx - w / 2.0).round(), (cy - h / 2.0).round());
    out.push(rect(x, y, w, h, peak - HOT_SPOT_RISE, focus));
    out.push(hot_spot(cx, cy, peak, focus));
    out
}

fn lamp(cx: f64, cy: f64, peak: f64, holder: bool, focus: usize) -> Vec<SceneObject> {
    let mut out = Vec::new();
    if holder {
        out.push(rect(cx - 2.0, cy + 3.0, 5.0, 14.0, HOLDER_TEMP, focus));
    }
    out.push(SceneObject {
        shape: Shape::Disc {
            cx,
            cy,
            radius: 3.5,
        },
        temp: peak - HOT_SPOT_RISE,
        focus_index: focus,
        probe: false,
    });
    out.push(hot_spot(cx, cy, peak, focus));
    out
}

fn scene(background_temp: f64, objects: Vec<Vec<SceneObject>>) -> SceneSpec {
    SceneSpec {
        width: WIDTH,
        height: HEIGHT,
        background_temp,
        objects: objects.into_iter().flatten().collect(),
        frames: FRAMES,
        blur_slope: BLUR_SLOPE,
        noise_std: DEFAULT_NOISE_STD,
        psf_radius: in_focus_psf_radius(),
    }
}

/// Looks up a preset by name, or by its 1-based set number.
pub fn preset(name: &str) -> Option<SceneSpec> {
    let index = match name.parse::<usize>() {
        Ok(n @ 1..=6) => n - 1,
        _ => PRESET_NAMES.iter().position(|&p| p == name)?,
    };
    let (near, far) = (NEAR_FOCUS, FAR_FOCUS);
    let (left, right) = ((50.0, 60.0), (112.0, 60.0));
    Some(match index {
        0 => scene(
            14.0,
            vec![
                device(left.0, left.1, 7.0, 12.0, 41.2, Some(22.0), near),
                device(right.0, right.1, 12.0, 7.0, 32.9, None, far),
            ],
        ),
        1 => scene(
            14.0,
            vec![
                device(left.0, left.1, 7.0, 12.0, 39.4, None, near),
                device(right.0, right.1, 12.0, 7.0, 55.9, Some(30.5), far),
            ],
        ),
        2 => scene(
            20.0,
            vec![
                // Sits a little behind the far lamp.
                vec![rect(0.0, 0.0, WIDTH as f64, 40.0, 18.0, far + 2)],
                lamp(left.0, left.1, 51.7, true, near),
                lamp(right.0, right.1, 50.4, true, far),
            ],
        ),
        3 => scene(
            24.0,
            vec![
                lamp(left.0, left.1, 43.3, true, near),
                lamp(right.0, right.1, 41.3, true, far),
            ],
        ),
        4 => scene(
            24.0,
            vec![
                lamp(left.0, left.1, 57.0, false, near),
                lamp(right.0, right.1, 53.6, false, far),
            ],
        ),
        _ => scene(
            18.0,
            vec![
                lamp(left.0, left.1, 57.9, true, near),
                lamp(right.0, right.1, 54.7, true, far),
            ],
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for (i, name) in PRESET_NAMES.iter().enumerate() {
            let scene = preset(name).unwrap();
            scene.validate().unwrap();
            assert_eq!(scene.frames, 96);
            assert_eq!(preset(&(i + 1).to_string()), Some(scene));
        }
        assert!(preset("nope").is_none());
        assert!(preset("7").is_none());
    }

    #[test]
    fn psf_radius_from_optics() {
        // 23.18 μm Airy disc over 17 μm pixels.
        assert!((in_focus_psf_radius() - 11.59 / 17.0).abs() < 1e-9);
    }

    #[test]
    fn one_probe_per_object() {
        for name in PRESET_NAMES {
            let scene = preset(name).unwrap();
            assert_eq!(scene.objects.iter().filter(|o| o.probe).count(), 2);
        }
    }
}
