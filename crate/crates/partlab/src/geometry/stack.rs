//! Material stack: film, substrate, and surface-layer parameters.

use super::GeometryError;
use serde::{Deserialize, Serialize};

/// Layer thicknesses and permittivities shared by every simulation.
///
/// The vertical convention throughout the crate: the substrate occupies
/// z < 0, metal film sits on top of it at 0 < z < `h_film`, and vacuum
/// fills the rest. Surface layers of thickness `t_interface` decorate the
/// metal-substrate boundary (just below z = 0 under metal), the exposed
/// substrate surface (just below z = 0 elsewhere), and the metal top and
/// sidewalls (just above the film).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialStack {
    /// Substrate relative permittivity (isotropic approximation).
    pub eps_substrate: f64,
    /// Surface-layer relative permittivity, shared by all three layer kinds.
    pub eps_interface: f64,
    /// Vacuum relative permittivity; always 1.
    pub eps_vacuum: f64,
    /// Surface-layer thickness in m.
    pub t_interface: f64,
    /// Metal film thickness in m.
    pub h_film: f64,
}

impl Default for MaterialStack {
    /// Sapphire-like substrate, 3 nm epsilon-10 layers, 80 nm bilayer film.
    fn default() -> Self {
        MaterialStack {
            eps_substrate: 10.0,
            eps_interface: 10.0,
            eps_vacuum: 1.0,
            t_interface: 3e-9,
            h_film: 80e-9,
        }
    }
}

/// Builds a validated stack; omitted arguments take the defaults.
pub fn make_stack(
    eps_substrate: Option<f64>,
    eps_interface: Option<f64>,
    t_interface: Option<f64>,
    h_film: Option<f64>,
) -> Result<MaterialStack, GeometryError> {
    let d = MaterialStack::default();
    let eps_substrate = eps_substrate.unwrap_or(d.eps_substrate);
    let eps_interface = eps_interface.unwrap_or(d.eps_interface);
    let t_interface = t_interface.unwrap_or(d.t_interface);
    let h_film = h_film.unwrap_or(d.h_film);
    for (name, value) in [("t_interface", t_interface), ("h_film", h_film)] {
        if !(value > 0.0) {
            return Err(GeometryError::NonPositiveDimension { name, value });
        }
    }
    for (name, value) in [
        ("eps_substrate", eps_substrate),
        ("eps_interface", eps_interface),
    ] {
        if !(value >= 1.0) {
            return Err(GeometryError::PermittivityBelowVacuum { name, value });
        }
    }
    if t_interface >= h_film {
        return Err(GeometryError::InterfaceThickerThanFilm {
            t_interface,
            h_film,
        });
    }
    Ok(MaterialStack {
        eps_substrate,
        eps_interface,
        eps_vacuum: 1.0,
        t_interface,
        h_film,
    })
}
