//! Mesh builders for the three solve domains.
//!
//! * 2D edge cross-sections with the film and both 3 nm interface layers
//!   explicitly resolved (or, optionally, the film collapsed to a
//!   zero-thickness sheet for refinement studies),
//! * local 3D boxes around the junction leads, film and layers resolved,
//! * global 3D boxes around a whole device with all metal collapsed to
//!   zero-thickness sheets on the substrate plane.
//!
//! The shared conventions: the substrate top face is z = 0, the film spans
//! 0 < z < h, interface layers span (-t, 0) and (h, h+t), and a sidewall
//! layer hugs each film edge one thickness t into the gap. Every material
//! boundary is anchored so it lands exactly on a mesh plane.

use crate::geometry::{
    CrossSectionSpec, CrossSectionStyle, DeviceLayout, MaterialStack, SideBoundary,
};

use super::{
    build_axis, AnchorPoint, BoundaryCondition, CellKind, InterfaceTag, MeshError, RectMesh,
    SheetPlane, BUDGET_2D, BUDGET_3D,
};

/// Knobs for 2D cross-section meshes.
#[derive(Debug, Clone, Copy)]
pub struct CrossSectionMeshOptions {
    /// Smallest cell at metal edges and layer planes (m).
    pub min_cell: f64,
    /// Geometric grading ratio, 1 < ratio <= 1.5.
    pub ratio: f64,
    /// Cell-size cap away from all anchors; 0 selects window/10.
    pub max_cell: f64,
    /// Half-width of the refined band around each metal edge (m).
    pub fine_band: f64,
    /// Cell-size cap inside the refined band.
    pub fine_cap: f64,
    pub budget: usize,
    /// Collapse the film to a zero-thickness sheet at z = 0 and drop the
    /// interface layers. Used by refinement studies of the sheet model.
    pub sheet_metal: bool,
}

impl Default for CrossSectionMeshOptions {
    fn default() -> Self {
        CrossSectionMeshOptions {
            min_cell: 0.5e-9,
            ratio: 1.3,
            max_cell: 0.0,
            fine_band: 2e-6,
            fine_cap: 50e-9,
            budget: BUDGET_2D,
            sheet_metal: false,
        }
    }
}

/// Conductor layout of a cross-section along x: intervals of metal, the
/// edges between metal and gap, and the terminal potential table.
struct SectionPlan {
    x_min: f64,
    x_max: f64,
    /// Open intervals (x0, x1) of metal, with their terminal id.
    metal: Vec<(f64, f64, u8)>,
    /// Edge position and the side carrying metal: +1 means metal at x > pos.
    edges: Vec<(f64, i8)>,
    terminals: Vec<f64>,
}

impl SectionPlan {
    fn for_spec(spec: &CrossSectionSpec) -> SectionPlan {
        let (w, g, win) = (spec.w, spec.g, spec.window);
        match spec.style {
            // Half-cell of a periodic finger array: zero-potential plane at
            // the gap center, mirror plane through the finger center.
            CrossSectionStyle::Idc => SectionPlan {
                x_min: -0.5 * g,
                x_max: 0.5 * w,
                metal: vec![(0.0, 0.5 * w, 1)],
                edges: vec![(0.0, 1)],
                terminals: vec![0.0, 0.5],
            },
            // Center conductor (mirrored at its midplane) facing a ground
            // plane that runs into the far wall.
            CrossSectionStyle::Cpw => SectionPlan {
                x_min: -g - win,
                x_max: 0.5 * w,
                metal: vec![(-g - win, -g, 0), (0.0, 0.5 * w, 1)],
                edges: vec![(-g, -1), (0.0, 1)],
                terminals: vec![0.0, 0.5],
            },
            // One pad of a coplanar capacitor: the twin pad is replaced by
            // the zero-potential plane at the gap center; open space past
            // the outer pad edge.
            CrossSectionStyle::Cpc => SectionPlan {
                x_min: -0.5 * g,
                x_max: w + win,
                metal: vec![(0.0, w, 1)],
                edges: vec![(0.0, 1), (w, -1)],
                terminals: vec![0.0, 0.5],
            },
            // Isolated edge: metal runs into the wall behind it, grounded
            // wall a distance g into the gap.
            CrossSectionStyle::SingleEdge => SectionPlan {
                x_min: -g,
                x_max: w,
                metal: vec![(0.0, w, 1)],
                edges: vec![(0.0, 1)],
                terminals: vec![0.0, 0.5],
            },
        }
    }

    fn metal_at(&self, x: f64) -> Option<u8> {
        self.metal
            .iter()
            .find(|&&(a, b, _)| x > a && x < b)
            .map(|&(_, _, t)| t)
    }

    /// True inside the one-thickness sidewall strip hugging any edge.
    fn in_sidewall(&self, x: f64, t: f64) -> bool {
        self.edges.iter().any(|&(p, s)| {
            if s > 0 {
                x > p - t && x < p
            } else {
                x > p && x < p + t
            }
        })
    }
}

fn side_bc(b: SideBoundary) -> BoundaryCondition {
    match b {
        SideBoundary::Ground => BoundaryCondition::Dirichlet(0.0),
        SideBoundary::Symmetry | SideBoundary::OpenApprox => BoundaryCondition::Neumann,
    }
}

/// Builds the 2D mesh for an edge cross-section. Axes are [x, z].
pub fn build_cross_section(
    spec: &CrossSectionSpec,
    opts: &CrossSectionMeshOptions,
) -> Result<RectMesh, MeshError> {
    spec.validate()
        .map_err(|e| MeshError::InvalidSpec(e.to_string()))?;
    let plan = SectionPlan::for_spec(spec);
    let stack = spec.stack;
    let (t, h) = (stack.t_interface, stack.h_film);
    let max_cell = if opts.max_cell > 0.0 {
        opts.max_cell
    } else {
        spec.window / 10.0
    };
    let layer_cap = t / 6.0;

    // x axis: fine at every edge; the sidewall strip next to each edge gets
    // its own plane and a six-cell cap so the layer is always resolved.
    let mut xp = vec![
        AnchorPoint {
            pos: plan.x_min,
            min_cell: max_cell,
        },
        AnchorPoint {
            pos: plan.x_max,
            min_cell: max_cell,
        },
    ];
    for &(e, side) in &plan.edges {
        xp.push(AnchorPoint {
            pos: e,
            min_cell: opts.min_cell,
        });
        if !opts.sheet_metal {
            xp.push(AnchorPoint {
                pos: e - f64::from(side) * t,
                min_cell: opts.min_cell,
            });
        }
    }
    let edges = plan.edges.clone();
    let sheet = opts.sheet_metal;
    let (fine_band, fine_cap) = (opts.fine_band, opts.fine_cap);
    let x_cap = move |mid: f64| -> f64 {
        if !sheet {
            for &(p, s) in &edges {
                let inside = if s > 0 {
                    mid > p - t && mid < p
                } else {
                    mid > p && mid < p + t
                };
                if inside {
                    return t / 6.0;
                }
            }
        }
        if edges.iter().any(|&(p, _)| (mid - p).abs() <= fine_band) {
            return fine_cap;
        }
        max_cell
    };
    let x_axis = build_axis(xp, opts.ratio, &x_cap)?;

    // z axis: layer planes are anchors; the two layers are capped to t/6 so
    // each is crossed by at least six cells.
    let mut zp = vec![
        AnchorPoint {
            pos: -spec.window,
            min_cell: max_cell,
        },
        AnchorPoint {
            pos: spec.window,
            min_cell: max_cell,
        },
        AnchorPoint {
            pos: 0.0,
            min_cell: opts.min_cell,
        },
    ];
    if !opts.sheet_metal {
        for pos in [-t, h, h + t] {
            zp.push(AnchorPoint {
                pos,
                min_cell: opts.min_cell,
            });
        }
    }
    let z_cap = move |mid: f64| -> f64 {
        if sheet {
            return max_cell;
        }
        if (mid > -t && mid < 0.0) || (mid > h && mid < h + t) {
            layer_cap
        } else if mid > 0.0 && mid < h {
            h / 8.0
        } else {
            max_cell
        }
    };
    let z_axis = build_axis(zp, opts.ratio, &z_cap)?;

    let (nx, nz) = (x_axis.n_cells(), z_axis.n_cells());
    let n = nx * nz;
    if n > opts.budget {
        return Err(MeshError::BudgetExceeded {
            cells: n,
            budget: opts.budget,
        });
    }

    let mut cell_eps = vec![1.0; n];
    let mut cell_kind = vec![CellKind::Dielectric; n];
    let mut tags = if opts.sheet_metal {
        Vec::new()
    } else {
        vec![InterfaceTag::None; n]
    };
    for k in 0..nz {
        let zc = z_axis.center(k);
        for i in 0..nx {
            let xc = x_axis.center(i);
            let idx = i + nx * k;
            if opts.sheet_metal {
                if zc < 0.0 {
                    cell_eps[idx] = stack.eps_substrate;
                }
                continue;
            }
            let (eps, kind, tag) = classify_section_cell(&plan, &stack, xc, zc);
            cell_eps[idx] = eps;
            cell_kind[idx] = kind;
            tags[idx] = tag;
        }
    }

    let sheets = if opts.sheet_metal {
        let plane = z_axis
            .plane_index(0.0, 1e-15 * spec.window)
            .expect("z = 0 is an anchored plane");
        let term: Vec<i16> = (0..nx)
            .map(|i| match plan.metal_at(x_axis.center(i)) {
                Some(t) => i16::from(t),
                None => -1,
            })
            .collect();
        vec![SheetPlane {
            axis: 1,
            plane,
            term,
        }]
    } else {
        Vec::new()
    };

    Ok(RectMesh {
        axes: vec![x_axis, z_axis],
        cell_eps,
        cell_kind,
        terminals: plan.terminals,
        sheets,
        boundary: spec.boundary.iter().map(|&b| side_bc(b)).collect(),
        tags,
        budget: opts.budget,
    })
}

/// Material of one explicit-film cross-section cell.
fn classify_section_cell(
    plan: &SectionPlan,
    stack: &MaterialStack,
    xc: f64,
    zc: f64,
) -> (f64, CellKind, InterfaceTag) {
    let (t, h) = (stack.t_interface, stack.h_film);
    if zc < -t {
        (stack.eps_substrate, CellKind::Dielectric, InterfaceTag::None)
    } else if zc < 0.0 {
        let tag = if plan.metal_at(xc).is_some() {
            InterfaceTag::Ms
        } else {
            InterfaceTag::Sa
        };
        (stack.eps_interface, CellKind::Dielectric, tag)
    } else if zc < h {
        if let Some(term) = plan.metal_at(xc) {
            (1.0, CellKind::Conductor(term), InterfaceTag::None)
        } else if plan.in_sidewall(xc, t) {
            (stack.eps_interface, CellKind::Dielectric, InterfaceTag::Ma)
        } else {
            (stack.eps_vacuum, CellKind::Dielectric, InterfaceTag::None)
        }
    } else if zc < h + t {
        if plan.metal_at(xc).is_some() || plan.in_sidewall(xc, t) {
            (stack.eps_interface, CellKind::Dielectric, InterfaceTag::Ma)
        } else {
            (stack.eps_vacuum, CellKind::Dielectric, InterfaceTag::None)
        }
    } else {
        (stack.eps_vacuum, CellKind::Dielectric, InterfaceTag::None)
    }
}

/// Geometry of a local two-lead junction box.
///
/// Two collinear leads run along y toward each other, stepping down from
/// `lead_width` to `taper_width` for the last `taper_len` before stopping
/// `tip_gap` apart, centered on the origin. The junction itself is lumped:
/// the gap between the tips is plain dielectric. Wide sections run into
/// the y walls.
#[derive(Debug, Clone, Copy)]
pub struct LocalLeadSpec {
    pub stack: MaterialStack,
    pub lead_width: f64,
    pub taper_width: f64,
    pub taper_len: f64,
    pub tip_gap: f64,
    /// Half-extent of the box in x and y (m).
    pub extent_xy: f64,
    /// Half-extent in z (m).
    pub extent_z: f64,
}

impl Default for LocalLeadSpec {
    fn default() -> Self {
        LocalLeadSpec {
            stack: MaterialStack::default(),
            lead_width: 1e-6,
            taper_width: 0.2e-6,
            taper_len: 1e-6,
            tip_gap: 0.2e-6,
            extent_xy: 25e-6,
            extent_z: 25e-6,
        }
    }
}

impl LocalLeadSpec {
    fn validate(&self) -> Result<(), MeshError> {
        let ok = self.lead_width > 0.0
            && self.taper_width > 0.0
            && self.taper_width <= self.lead_width
            && self.taper_len > 0.0
            && self.tip_gap > 0.0
            && self.extent_xy > self.tip_gap / 2.0 + self.taper_len + 1e-6
            && self.extent_z > 10.0 * self.stack.h_film;
        if ok {
            Ok(())
        } else {
            Err(MeshError::InvalidSpec(
                "local lead geometry is degenerate or larger than its box".into(),
            ))
        }
    }

    /// Footprint rectangles as (min, max) corners; terminal 1 is the +y
    /// lead, terminal 2 the -y lead.
    fn rects(&self) -> Vec<([f64; 2], [f64; 2], u8)> {
        let g2 = 0.5 * self.tip_gap;
        let yj = g2 + self.taper_len;
        let (wt2, w2) = (0.5 * self.taper_width, 0.5 * self.lead_width);
        let e = self.extent_xy;
        vec![
            ([-wt2, g2], [wt2, yj], 1),
            ([-w2, yj], [w2, e], 1),
            ([-wt2, -yj], [wt2, -g2], 2),
            ([-w2, -e], [w2, -yj], 2),
        ]
    }
}

/// Knobs for the two 3D builders.
#[derive(Debug, Clone, Copy)]
pub struct GlobalMeshOptions {
    /// Smallest cell at pad and lead edges in the plane (m).
    pub min_cell_edge: f64,
    /// First cell height on either side of the metal plane (m).
    pub min_cell_z: f64,
    pub ratio: f64,
    /// Cell-size cap over the device neighborhood (m).
    pub max_cell_chip: f64,
    pub budget: usize,
    /// Uniform scale on the enclosure about the substrate center; 0.5
    /// builds the half-scale box used by wall-sensitivity checks.
    pub enclosure_scale: f64,
}

impl Default for GlobalMeshOptions {
    fn default() -> Self {
        GlobalMeshOptions {
            min_cell_edge: 0.25e-6,
            min_cell_z: 0.1e-6,
            ratio: 1.3,
            max_cell_chip: 40e-6,
            budget: BUDGET_3D,
            enclosure_scale: 1.0,
        }
    }
}

/// Builds the local 3D box around the junction leads with the film and
/// all interface layers explicitly resolved. Axes are [x, y, z]; all six
/// walls approximate open space (zero normal field).
pub fn build_local_lead(
    spec: &LocalLeadSpec,
    opts: &GlobalMeshOptions,
) -> Result<RectMesh, MeshError> {
    spec.validate()?;
    let stack = spec.stack;
    let (t, h) = (stack.t_interface, stack.h_film);
    let fine = 0.5e-9;
    let rects = spec.rects();

    // Gather the metal outline planes per axis; each outline plane gets a
    // sidewall companion one thickness t outside the metal.
    let g2 = 0.5 * spec.tip_gap;
    let yj = g2 + spec.taper_len;
    let (wt2, w2) = (0.5 * spec.taper_width, 0.5 * spec.lead_width);
    let e = spec.extent_xy;

    let mut xp = Vec::new();
    for v in [-w2 - t, -w2, -wt2 - t, -wt2, wt2, wt2 + t, w2, w2 + t] {
        xp.push(AnchorPoint {
            pos: v,
            min_cell: fine,
        });
    }
    let mut yp = Vec::new();
    for v in [
        -yj - t,
        -yj,
        -g2,
        -g2 + t,
        g2 - t,
        g2,
        yj,
        yj + t,
        -1e-6,
        1e-6,
        -10e-6,
        10e-6,
    ] {
        let min_cell = if v.abs() > 0.9e-6 && (v.abs() - 1e-6).abs() < 1e-9
            || (v.abs() - 10e-6).abs() < 1e-9
        {
            0.1e-6
        } else {
            fine
        };
        yp.push(AnchorPoint { pos: v, min_cell });
    }
    let mut zp = Vec::new();
    for v in [-t, 0.0, h, h + t] {
        zp.push(AnchorPoint {
            pos: v,
            min_cell: fine,
        });
    }
    for (points, lo, hi) in [
        (&mut xp, -e, e),
        (&mut yp, -e, e),
        (&mut zp, -spec.extent_z, spec.extent_z),
    ] {
        points.push(AnchorPoint {
            pos: lo,
            min_cell: f64::INFINITY,
        });
        points.push(AnchorPoint {
            pos: hi,
            min_cell: f64::INFINITY,
        });
    }

    let coarse = spec.extent_xy / 6.0;
    let layer = t / 6.0;
    let x_strips = [(-w2 - t, -w2), (-wt2 - t, -wt2), (wt2, wt2 + t), (w2, w2 + t)];
    let x_cap = move |mid: f64| -> f64 {
        if x_strips.iter().any(|&(a, b)| mid > a && mid < b) {
            layer
        } else {
            coarse
        }
    };
    let y_strips = [(-yj - t, -yj), (-g2, -g2 + t), (g2 - t, g2), (yj, yj + t)];
    let y_cap = move |mid: f64| -> f64 {
        if y_strips.iter().any(|&(a, b)| mid > a && mid < b) {
            layer
        } else {
            coarse
        }
    };
    let z_cap = move |mid: f64| -> f64 {
        if (mid > -t && mid < 0.0) || (mid > h && mid < h + t) {
            layer
        } else if mid > 0.0 && mid < h {
            h / 8.0
        } else {
            coarse
        }
    };

    let x_axis = build_axis(xp, opts.ratio, &x_cap)?;
    let y_axis = build_axis(yp, opts.ratio, &y_cap)?;
    let z_axis = build_axis(zp, opts.ratio, &z_cap)?;

    let (nx, ny, nz) = (x_axis.n_cells(), y_axis.n_cells(), z_axis.n_cells());
    let n = nx * ny * nz;
    if n > opts.budget {
        return Err(MeshError::BudgetExceeded {
            cells: n,
            budget: opts.budget,
        });
    }

    let in_metal = |x: f64, y: f64| -> Option<u8> {
        rects
            .iter()
            .find(|(lo, hi, _)| x > lo[0] && x < hi[0] && y > lo[1] && y < hi[1])
            .map(|&(_, _, term)| term)
    };
    let near_metal = |x: f64, y: f64| -> bool {
        rects.iter().any(|(lo, hi, _)| {
            let dx = (lo[0] - x).max(x - hi[0]).max(0.0);
            let dy = (lo[1] - y).max(y - hi[1]).max(0.0);
            dx.max(dy) < t
        })
    };

    let mut cell_eps = vec![1.0; n];
    let mut cell_kind = vec![CellKind::Dielectric; n];
    let mut tags = vec![InterfaceTag::None; n];
    for k in 0..nz {
        let zc = z_axis.center(k);
        for j in 0..ny {
            let yc = y_axis.center(j);
            for i in 0..nx {
                let xc = x_axis.center(i);
                let idx = i + nx * (j + ny * k);
                let metal = in_metal(xc, yc);
                let (eps, kind, tag) = if zc < -t {
                    (stack.eps_substrate, CellKind::Dielectric, InterfaceTag::None)
                } else if zc < 0.0 {
                    let tag = if metal.is_some() {
                        InterfaceTag::Ms
                    } else {
                        InterfaceTag::Sa
                    };
                    (stack.eps_interface, CellKind::Dielectric, tag)
                } else if zc < h {
                    if let Some(term) = metal {
                        (1.0, CellKind::Conductor(term), InterfaceTag::None)
                    } else if near_metal(xc, yc) {
                        (stack.eps_interface, CellKind::Dielectric, InterfaceTag::Ma)
                    } else {
                        (1.0, CellKind::Dielectric, InterfaceTag::None)
                    }
                } else if zc < h + t {
                    if metal.is_some() || near_metal(xc, yc) {
                        (stack.eps_interface, CellKind::Dielectric, InterfaceTag::Ma)
                    } else {
                        (1.0, CellKind::Dielectric, InterfaceTag::None)
                    }
                } else {
                    (1.0, CellKind::Dielectric, InterfaceTag::None)
                };
                cell_eps[idx] = eps;
                cell_kind[idx] = kind;
                tags[idx] = tag;
            }
        }
    }

    Ok(RectMesh {
        axes: vec![x_axis, y_axis, z_axis],
        cell_eps,
        cell_kind,
        terminals: vec![0.0, 0.5, -0.5],
        sheets: Vec::new(),
        boundary: vec![BoundaryCondition::Neumann; 6],
        tags,
        budget: opts.budget,
    })
}

/// Builds the global 3D mesh for a device: all metal collapsed to
/// zero-thickness sheets on the z = 0 plane, no interface layers, grounded
/// enclosure walls. Axes are [x, y, z].
pub fn build_global(
    layout: &DeviceLayout,
    stack: &MaterialStack,
    opts: &GlobalMeshOptions,
) -> Result<RectMesh, MeshError> {
    // Optionally shrink the enclosure about the substrate center.
    let sub = layout.substrate;
    let enc = layout.enclosure;
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for k in 0..3 {
        let c = 0.5 * (sub.min[k] + sub.max[k]);
        lo[k] = c + (enc.min[k] - c) * opts.enclosure_scale;
        hi[k] = c + (enc.max[k] - c) * opts.enclosure_scale;
        if lo[k] > sub.min[k] || hi[k] < sub.max[k] {
            return Err(MeshError::InvalidSpec(format!(
                "scaled enclosure no longer contains the substrate along axis {k}"
            )));
        }
    }

    // Plane anchors: every pad vertex coordinate, every lead outline and
    // centerline coordinate, the substrate box, and the walls.
    let mut xp: Vec<AnchorPoint> = Vec::new();
    let mut yp: Vec<AnchorPoint> = Vec::new();
    let fine = opts.min_cell_edge;
    for pad in &layout.pads {
        for v in pad.polygon.vertices() {
            xp.push(AnchorPoint {
                pos: v[0],
                min_cell: fine,
            });
            yp.push(AnchorPoint {
                pos: v[1],
                min_cell: fine,
            });
        }
    }
    for lead in &layout.leads {
        for (rlo, rhi) in lead.footprint() {
            for r in [rlo, rhi] {
                xp.push(AnchorPoint {
                    pos: r[0],
                    min_cell: fine,
                });
                yp.push(AnchorPoint {
                    pos: r[1],
                    min_cell: fine,
                });
            }
        }
        for v in &lead.path {
            xp.push(AnchorPoint {
                pos: v[0],
                min_cell: fine,
            });
            yp.push(AnchorPoint {
                pos: v[1],
                min_cell: fine,
            });
        }
    }
    for (points, axis) in [(&mut xp, 0usize), (&mut yp, 1usize)] {
        points.push(AnchorPoint {
            pos: sub.min[axis],
            min_cell: 5e-6,
        });
        points.push(AnchorPoint {
            pos: sub.max[axis],
            min_cell: 5e-6,
        });
        points.push(AnchorPoint {
            pos: lo[axis],
            min_cell: f64::INFINITY,
        });
        points.push(AnchorPoint {
            pos: hi[axis],
            min_cell: f64::INFINITY,
        });
    }
    let zp = vec![
        AnchorPoint {
            pos: 0.0,
            min_cell: opts.min_cell_z,
        },
        AnchorPoint {
            pos: sub.min[2],
            min_cell: 20e-6,
        },
        AnchorPoint {
            pos: lo[2],
            min_cell: f64::INFINITY,
        },
        AnchorPoint {
            pos: hi[2],
            min_cell: f64::INFINITY,
        },
    ];

    // Caps: tight over the metal neighborhood, looser across the rest of
    // the chip, coarse in the empty enclosure.
    let mut metal_lo = [f64::INFINITY; 2];
    let mut metal_hi = [f64::NEG_INFINITY; 2];
    for pad in &layout.pads {
        let (blo, bhi) = pad.polygon.bbox();
        for k in 0..2 {
            metal_lo[k] = metal_lo[k].min(blo[k]);
            metal_hi[k] = metal_hi[k].max(bhi[k]);
        }
    }
    let margin = 50e-6;
    let chip_cap = opts.max_cell_chip;
    let sub_cap = (chip_cap * 4.0).max(150e-6);
    let enc_cap = [
        (hi[0] - lo[0]) / 8.0,
        (hi[1] - lo[1]) / 8.0,
        (hi[2] - lo[2]) / 8.0,
    ];
    let cap_for = move |axis: usize, mid: f64| -> f64 {
        if mid > metal_lo[axis] - margin && mid < metal_hi[axis] + margin {
            chip_cap
        } else if mid > sub.min[axis] && mid < sub.max[axis] {
            sub_cap
        } else {
            enc_cap[axis]
        }
    };
    let x_cap = move |mid: f64| cap_for(0, mid);
    let y_cap = move |mid: f64| cap_for(1, mid);
    let depth = -sub.min[2];
    let z_cap = move |mid: f64| -> f64 {
        if mid > sub.min[2] && mid < 0.0 {
            (depth / 6.0).min(sub_cap)
        } else if mid > 0.0 && mid < -sub.min[2] {
            sub_cap
        } else {
            enc_cap[2]
        }
    };

    let x_axis = build_axis(xp, opts.ratio, &x_cap)?;
    let y_axis = build_axis(yp, opts.ratio, &y_cap)?;
    let z_axis = build_axis(zp, opts.ratio, &z_cap)?;

    let (nx, ny, nz) = (x_axis.n_cells(), y_axis.n_cells(), z_axis.n_cells());
    let n = nx * ny * nz;
    if n > opts.budget {
        return Err(MeshError::BudgetExceeded {
            cells: n,
            budget: opts.budget,
        });
    }

    let mut cell_eps = vec![1.0; n];
    let cell_kind = vec![CellKind::Dielectric; n];
    for k in 0..nz {
        let zc = z_axis.center(k);
        if zc >= 0.0 || zc <= sub.min[2] {
            continue;
        }
        for j in 0..ny {
            let yc = y_axis.center(j);
            let in_y = yc > sub.min[1] && yc < sub.max[1];
            for i in 0..nx {
                let xc = x_axis.center(i);
                if in_y && xc > sub.min[0] && xc < sub.max[0] {
                    cell_eps[i + nx * (j + ny * k)] = stack.eps_substrate;
                }
            }
        }
    }

    let plane = z_axis
        .plane_index(0.0, 1e-15 * (hi[2] - lo[2]).abs())
        .expect("z = 0 is an anchored plane");
    let mut term = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let yc = y_axis.center(j);
        for i in 0..nx {
            let xc = x_axis.center(i);
            term.push(match layout.metal_potential([xc, yc]) {
                Some(v) if v > 0.0 => 1,
                Some(_) => 2,
                None => -1,
            });
        }
    }

    Ok(RectMesh {
        axes: vec![x_axis, y_axis, z_axis],
        cell_eps,
        cell_kind,
        terminals: vec![0.0, 0.5, -0.5],
        sheets: vec![SheetPlane {
            axis: 2,
            plane,
            term,
        }],
        boundary: vec![BoundaryCondition::Dirichlet(0.0); 6],
        tags: Vec::new(),
        budget: opts.budget,
    })
}
