//! Gluing two copies of the end along `Φ(ϱ, x, w) = (20 − ϱ, −x, P w)`, where
//! `P` conjugates the monodromy `A` to `A⁻¹`.
//!
//! Chart `(ϱ, x, u, v)` on the collar.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::exterior::{Axis, FormField, FormValue, Grid};
use crate::report::{CheckResult, Status};
use crate::sl2z::{brute_force_conjugator, conjugate_to_inverse, monodromy_matrix, Sl2Matrix};

pub const REF_GLUING: &str =
    "\"A is conjugate to A^{-1}\"; the cylindrical ends are identified by an orientation-reversing map";

pub const CONJUGATOR_BOUND: i64 = 60;

#[derive(Clone, Debug)]
pub struct GluingMap {
    pub monodromy: Sl2Matrix,
    pub conjugator: Sl2Matrix,
    pub jacobian: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

/// Finds `P` with `P A = A⁻¹ P`, or `GluingUnavailable` when `A` is not conjugate to its inverse.
pub fn gluing_map(triple: [i64; 3]) -> Result<GluingMap> {
    let [p, q, r] = triple;
    let a = monodromy_matrix(p, q, r)?;
    if !conjugate_to_inverse(&a)? {
        return Err(Error::GluingUnavailable(format!("monodromy {:?} is not conjugate to its inverse in SL(2,Z)", a.rows())));
    }
    let inv = a.inverse()?;
    let pm = brute_force_conjugator(&a, &inv, CONJUGATOR_BOUND).ok_or_else(|| {
        Error::GluingUnavailable(format!("no conjugator with entries bounded by {CONJUGATOR_BOUND}"))
    })?;
    if pm.mul(&a)? != inv.mul(&pm)? || pm.determinant() != 1 {
        return Err(Error::GluingUnavailable("conjugator failed the exact check".into()));
    }
    let [[p00, p01], [p10, p11]] = pm.rows();
    let jacobian = vec![
        vec![-1.0, 0.0, 0.0, 0.0],
        vec![0.0, -1.0, 0.0, 0.0],
        vec![0.0, 0.0, p00 as f64, p01 as f64],
        vec![0.0, 0.0, p10 as f64, p11 as f64],
    ];
    Ok(GluingMap { monodromy: a, conjugator: pm, jacobian, offset: vec![20.0, 0.0, 0.0, 0.0] })
}

/// `a dϱ∧dx + b du∧dv`.
pub fn collar_form(a: f64, b: f64) -> Result<FormField> {
    let mut w = FormValue::zero(4, 2);
    w.add_term(&[0, 1], a);
    w.add_term(&[2, 3], b);
    FormField::constant(w)
}

#[derive(Clone, Debug)]
pub struct GluingVerdict {
    pub check: CheckResult,
    pub conjugator: Option<Sl2Matrix>,
    pub form_gap: f64,
}

pub fn verify_double_gluing(triple: [i64; 3], a: f64, b: f64, n: usize, tol: f64) -> Result<GluingVerdict> {
    let g = match gluing_map(triple) {
        Ok(g) => g,
        Err(Error::GluingUnavailable(why)) => {
            let check = CheckResult::new("double-gluing", REF_GLUING, "none")
                .status(Status::Skipped)
                .note(why);
            return Ok(GluingVerdict { check, conjugator: None, form_gap: 0.0 });
        }
        Err(e) => return Err(e),
    };
    let grid = Grid::new(vec![
        Axis::closed(9.0, 11.0, n),
        Axis::periodic(0.0, TAU, n),
        Axis::periodic(0.0, 1.0, n),
        Axis::periodic(0.0, 1.0, n),
    ])?;
    let mut form_gap = 0.0f64;
    let targets = [
        (collar_form(a, b)?, collar_form(a, b)?),
        (FormField::dx(4, 1)?, FormField::dx(4, 1)?.scale(-1.0)),
        (FormField::dx(4, 0)?, FormField::dx(4, 0)?.scale(-1.0)),
        (collar_form(1.0, 0.0)?, collar_form(1.0, 0.0)?),
    ];
    for (src, expect) in &targets {
        let pulled = src.pull_affine(&g.jacobian, &g.offset)?;
        for p in grid.points() {
            form_gap = form_gap.max(pulled.at(&p)?.max_abs_diff(&expect.at(&p)?));
        }
    }
    let check = CheckResult::new("double-gluing", REF_GLUING, grid.describe())
        .residual(form_gap)
        .pass_if(form_gap <= tol)
        .note(format!("conjugator P = {:?}", g.conjugator.rows()))
        .note(format!("max pullback gap {form_gap:.3e}"));
    Ok(GluingVerdict { check, conjugator: Some(g.conjugator), form_gap })
}
