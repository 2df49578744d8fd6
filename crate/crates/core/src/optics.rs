//! Diffraction-limited optics: Airy disc diameter and depth of field.
//!
//! All lengths are in meters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Diameter factor of the first dark ring of the Airy pattern.
pub const AIRY_FACTOR: f64 = 2.44;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensSpec {
    pub wavelength: f64,
    pub aperture_diameter: f64,
    pub f_number: f64,
    pub image_distance: f64,
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositiveInput { name, value })
    }
}

/// `2.44 λ v / D`, with `v` the image distance and `D` the aperture.
pub fn airy_diameter_from_geometry(wavelength: f64, image_distance: f64, aperture: f64) -> Result<f64> {
    let l = positive("wavelength", wavelength)?;
    let v = positive("image_distance", image_distance)?;
    let d = positive("aperture_diameter", aperture)?;
    Ok(AIRY_FACTOR * l * v / d)
}

/// `2.44 λ N`, valid away from the minimum focus distance.
pub fn airy_diameter_from_f_number(wavelength: f64, f_number: f64) -> Result<f64> {
    let l = positive("wavelength", wavelength)?;
    let n = positive("f_number", f_number)?;
    Ok(AIRY_FACTOR * l * n)
}

/// `D² / (4 λ)` for a diffraction-limited system.
pub fn depth_of_field_for(aperture: f64, wavelength: f64) -> Result<f64> {
    let d = positive("aperture_diameter", aperture)?;
    let l = positive("wavelength", wavelength)?;
    Ok(d * d / (4.0 * l))
}

impl LensSpec {
    pub fn validate(&self) -> Result<()> {
        positive("wavelength", self.wavelength)?;
        positive("aperture_diameter", self.aperture_diameter)?;
        positive("f_number", self.f_number)?;
        positive("image_distance", self.image_distance)?;
        Ok(())
    }
}

/// Airy disc diameter from the image distance and aperture.
pub fn airy_disc_diameter(lens: &LensSpec) -> Result<f64> {
    lens.validate()?;
    airy_diameter_from_geometry(lens.wavelength, lens.image_distance, lens.aperture_diameter)
}

/// Airy disc diameter from the f-number.
pub fn airy_disc_diameter_far_field(lens: &LensSpec) -> Result<f64> {
    lens.validate()?;
    airy_diameter_from_f_number(lens.wavelength, lens.f_number)
}

pub fn depth_of_field(lens: &LensSpec) -> Result<f64> {
    lens.validate()?;
    depth_of_field_for(lens.aperture_diameter, lens.wavelength)
}
