// Copyright 2026 collapse-lab Contributors
// SPDX-License-Identifier: Apache-2.0

//! C ABI for collapse-lab.
//!
//! Every fallible function returns a [`CollapseLabStatus`] and writes its result through an
//! out-pointer. On failure a message is kept per thread and can be read with
//! [`collapse_lab_last_error`]. Handles are opaque and must be released with the matching
//! `_free` function; strings returned by the library are released with
//! [`collapse_lab_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use collapse_lab::bounds::{self, ExclusionGrid, GridSpec, Verdict};
use collapse_lab::io;
use collapse_lab::master::{csl_com_decay_rate, dp_decay_time, MassDistribution};
use collapse_lab::pheno::{self, CslParams, NoiseSpectrum, Variant};
use collapse_lab::{Error, PhysicalConstants};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseLabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

/// Verdict of one exclusion-grid cell.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseLabVerdict {
    Excluded = 0,
    Allowed = 1,
    NoData = 2,
}

/// Log-spaced `(r_C, lambda)` grid.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseLabGridSpec {
    pub r_c_min: f64,
    pub r_c_max: f64,
    pub r_c_points: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_points: usize,
}

/// Physical constants table.
pub struct CollapseLabConstants(PhysicalConstants);

/// Computed exclusion region.
pub struct CollapseLabExclusionGrid(ExclusionGrid);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(CollapseLabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Config(_) | Error::Violations(_) | Error::Json(_) => CollapseLabStatus::Config,
            Error::Io(_) => CollapseLabStatus::Io,
            Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::GridTooCoarse { .. }
            | Error::InsufficientMargin { .. }
            | Error::OutsideGrid(_)
            | Error::Unnormalized(_)
            | Error::NotHermitian(_)
            | Error::NonCommuting(_)
            | Error::EmptyEnsemble => CollapseLabStatus::InvalidArgument,
            _ => CollapseLabStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(CollapseLabStatus::InvalidArgument, msg.into())
}

fn set_error(msg: &str) {
    let text = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> CollapseLabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CollapseLabStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal error: {msg}"));
            CollapseLabStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure(CollapseLabStatus::NullPointer, "null output pointer".into()))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(CollapseLabStatus::NullPointer, format!("null {what}")))
}

unsafe fn in_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(CollapseLabStatus::NullPointer, format!("null {what}")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| invalid("output contains a NUL byte"))
}

fn params(lambda: f64, r_c: f64) -> Result<CslParams, Failure> {
    Ok(CslParams::new(lambda, r_c)?)
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn collapse_lab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the next failing
/// call on the same thread.
#[no_mangle]
pub extern "C" fn collapse_lab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads constants from a JSON document, or the built-in table when `json` is NULL.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_constants_new(json: *const c_char, out: *mut *mut CollapseLabConstants) -> CollapseLabStatus {
    guard(|| {
        let out = out_ref(out)?;
        let consts = if json.is_null() {
            PhysicalConstants::codata()
        } else {
            PhysicalConstants::from_json(in_str(json, "constants JSON")?)?
        };
        *out = Box::into_raw(Box::new(CollapseLabConstants(consts)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn collapse_lab_constants_free(c: *mut CollapseLabConstants) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Looks up a constant by its field name (`hbar`, `m0`, `g`, ...).
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_constants_get(
    c: *const CollapseLabConstants,
    name: *const c_char,
    out: *mut f64,
) -> CollapseLabStatus {
    guard(|| {
        let c = in_ref(c, "constants")?;
        let name = in_str(name, "constant name")?;
        let out = out_ref(out)?;
        let table = serde_json::to_value(&c.0).map_err(Error::from)?;
        *out = table
            .get(name)
            .and_then(serde_json::Value::as_f64)
            .ok_or_else(|| invalid(format!("unknown constant {name}")))?;
        Ok(())
    })
}

/// Extra cold-atom position variance (m^2) after free evolution time `t`.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_x2t3_variance(
    c: *const CollapseLabConstants,
    lambda: f64,
    r_c: f64,
    t: f64,
    out: *mut f64,
) -> CollapseLabStatus {
    guard(|| {
        let c = in_ref(c, "constants")?;
        let out = out_ref(out)?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(invalid(format!("time must be >= 0, got {t}")));
        }
        *out = pheno::x2t3_extra_variance(t, &params(lambda, r_c)?, &c.0);
        Ok(())
    })
}

/// White-noise spontaneous photon emission rate (J^-1 s^-1) per atom at `energy_kev`.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_photon_rate(
    c: *const CollapseLabConstants,
    energy_kev: f64,
    atomic_number: f64,
    lambda: f64,
    r_c: f64,
    out: *mut f64,
) -> CollapseLabStatus {
    guard(|| {
        let c = in_ref(c, "constants")?;
        let out = out_ref(out)?;
        let rate = pheno::photon_rate(energy_kev * c.0.kev, atomic_number, &params(lambda, r_c)?, &NoiseSpectrum::White, &c.0)?;
        *out = rate.rate;
        Ok(())
    })
}

/// `-ln F` for white-noise CSL interference of a mass `m` with momentum transfer `k` and
/// displacement `q` (3-vectors) after time `t`.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn collapse_lab_interference_exponent(
    c: *const CollapseLabConstants,
    k: *const f64,
    q: *const f64,
    t: f64,
    mass: f64,
    lambda: f64,
    r_c: f64,
    out: *mut f64,
) -> CollapseLabStatus {
    guard(|| {
        let c = in_ref(c, "constants")?;
        let out = out_ref(out)?;
        let vec3 = |p: *const f64, what: &str| -> Result<[f64; 3], Failure> {
            if p.is_null() {
                return Err(Failure(CollapseLabStatus::NullPointer, format!("null {what}")));
            }
            Ok([*p, *p.add(1), *p.add(2)])
        };
        let (k, q) = (vec3(k, "k")?, vec3(q, "q")?);
        *out = pheno::interference_exponent(k, q, t, mass, &params(lambda, r_c)?, &Variant::White, &c.0)?;
        Ok(())
    })
}

fn body(radius: f64, mass: f64) -> Result<MassDistribution, Failure> {
    Ok(if radius > 0.0 {
        MassDistribution::sphere(radius, mass)?
    } else if radius == 0.0 {
        MassDistribution::point(mass)?
    } else {
        return Err(invalid(format!("radius must be >= 0, got {radius}")));
    })
}

/// Diósi-Penrose decay time (s) of a superposition displaced by `d`; `radius = 0` selects a
/// point mass smeared over `r0`.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_dp_decay_time(
    c: *const CollapseLabConstants,
    radius: f64,
    mass: f64,
    d: f64,
    r0: f64,
    out: *mut f64,
) -> CollapseLabStatus {
    guard(|| {
        let c = in_ref(c, "constants")?;
        let out = out_ref(out)?;
        *out = dp_decay_time(&body(radius, mass)?, d, r0, c.0.g, c.0.hbar)?;
        Ok(())
    })
}

/// CSL centre-of-mass coherence decay rate (1/s) of a body displaced by `d`; `radius = 0`
/// selects a point mass.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn collapse_lab_csl_decay_rate(
    c: *const CollapseLabConstants,
    radius: f64,
    mass: f64,
    d: f64,
    lambda: f64,
    r_c: f64,
    out: *mut f64,
) -> CollapseLabStatus {
    guard(|| {
        let c = in_ref(c, "constants")?;
        let out = out_ref(out)?;
        *out = csl_com_decay_rate(&body(radius, mass)?, d, lambda, r_c, c.0.m0)?;
        Ok(())
    })
}

/// Upper bound on lambda at `r_c` from the built-in constraint with the given id.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_lambda_upper_bound(
    c: *const CollapseLabConstants,
    constraint_id: *const c_char,
    r_c: f64,
    out: *mut f64,
) -> CollapseLabStatus {
    guard(|| {
        let c = in_ref(c, "constants")?;
        let id = in_str(constraint_id, "constraint id")?;
        let out = out_ref(out)?;
        let list = bounds::default_constraints();
        let k = list.iter().find(|k| k.id == id).ok_or_else(|| invalid(format!("unknown constraint {id}")))?;
        *out = bounds::lambda_upper_bound(k, r_c, &c.0)?;
        Ok(())
    })
}

/// Default exclusion grid (121 x 161 over r_C in [1e-9, 1e-3] m, lambda in [1e-20, 1e-4] 1/s).
#[no_mangle]
pub extern "C" fn collapse_lab_grid_spec_default() -> CollapseLabGridSpec {
    let g = GridSpec::default();
    CollapseLabGridSpec {
        r_c_min: g.r_c_min,
        r_c_max: g.r_c_max,
        r_c_points: g.r_c_points,
        lambda_min: g.lambda_min,
        lambda_max: g.lambda_max,
        lambda_points: g.lambda_points,
    }
}

/// Builds the exclusion region. `constraints_json` is a JSON array of constraints, or NULL
/// for the built-in suite; `spec` may be NULL for the default grid.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_new(
    c: *const CollapseLabConstants,
    constraints_json: *const c_char,
    spec: *const CollapseLabGridSpec,
    out: *mut *mut CollapseLabExclusionGrid,
) -> CollapseLabStatus {
    guard(|| {
        let c = in_ref(c, "constants")?;
        let out = out_ref(out)?;
        let list = if constraints_json.is_null() {
            bounds::default_constraints()
        } else {
            bounds::parse_constraints(in_str(constraints_json, "constraints JSON")?)?
        };
        let s = spec.as_ref().copied().unwrap_or_else(|| collapse_lab_grid_spec_default());
        let spec = GridSpec {
            r_c_min: s.r_c_min,
            r_c_max: s.r_c_max,
            r_c_points: s.r_c_points,
            lambda_min: s.lambda_min,
            lambda_max: s.lambda_max,
            lambda_points: s.lambda_points,
        };
        let grid = bounds::exclusion_region(&list, &spec, &c.0)?;
        *out = Box::into_raw(Box::new(CollapseLabExclusionGrid(grid)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_free(g: *mut CollapseLabExclusionGrid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of r_C columns, 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_r_c_len(g: *const CollapseLabExclusionGrid) -> usize {
    g.as_ref().map_or(0, |g| g.0.r_c.len())
}

/// Number of lambda rows, 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_lambda_len(g: *const CollapseLabExclusionGrid) -> usize {
    g.as_ref().map_or(0, |g| g.0.lambda.len())
}

unsafe fn grid_value(g: *const CollapseLabExclusionGrid, pick: impl FnOnce(&ExclusionGrid) -> Option<f64>, out: *mut f64) -> CollapseLabStatus {
    guard(|| {
        let g = in_ref(g, "exclusion grid")?;
        let out = out_ref(out)?;
        *out = pick(&g.0).ok_or_else(|| invalid("index out of range"))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_r_c(g: *const CollapseLabExclusionGrid, i: usize, out: *mut f64) -> CollapseLabStatus {
    grid_value(g, |g| g.r_c.get(i).copied(), out)
}

#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_lambda(g: *const CollapseLabExclusionGrid, j: usize, out: *mut f64) -> CollapseLabStatus {
    grid_value(g, |g| g.lambda.get(j).copied(), out)
}

/// Tightest lambda bound in column `i`; NaN when no constraint applies there.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_lambda_max(g: *const CollapseLabExclusionGrid, i: usize, out: *mut f64) -> CollapseLabStatus {
    grid_value(g, |g| g.columns.get(i).map(|c| c.lambda_max.unwrap_or(f64::NAN)), out)
}

#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_verdict(
    g: *const CollapseLabExclusionGrid,
    i: usize,
    j: usize,
    out: *mut CollapseLabVerdict,
) -> CollapseLabStatus {
    guard(|| {
        let g = in_ref(g, "exclusion grid")?;
        let out = out_ref(out)?;
        let v = g.0.verdict.get(i).and_then(|col| col.get(j)).ok_or_else(|| invalid("index out of range"))?;
        *out = match v {
            Verdict::Excluded => CollapseLabVerdict::Excluded,
            Verdict::Allowed => CollapseLabVerdict::Allowed,
            Verdict::NoData => CollapseLabVerdict::NoData,
        };
        Ok(())
    })
}

/// Id of the constraint binding column `i` as a new string (free with
/// [`collapse_lab_string_free`]), or NULL when the column has no bound.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_exclusion_binding(
    g: *const CollapseLabExclusionGrid,
    i: usize,
    out: *mut *mut c_char,
) -> CollapseLabStatus {
    guard(|| {
        let g = in_ref(g, "exclusion grid")?;
        let out = out_ref(out)?;
        let col = g.0.columns.get(i).ok_or_else(|| invalid("index out of range"))?;
        *out = match col.binding {
            Some(k) => into_c_string(g.0.constraint_ids[k].clone())?,
            None => ptr::null_mut(),
        };
        Ok(())
    })
}

/// Runs a configuration without touching the file system and returns
/// `{"tables": [{name, columns, rows}...], "documents": {file: text}}` as a new string.
/// `c` may be NULL for the built-in constants.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_run_json(
    config_json: *const c_char,
    c: *const CollapseLabConstants,
    out: *mut *mut c_char,
) -> CollapseLabStatus {
    guard(|| {
        let out = out_ref(out)?;
        let cfg = io::parse_config(in_str(config_json, "config JSON")?)?;
        let consts = c.as_ref().map_or_else(PhysicalConstants::codata, |c| c.0.clone());
        let result = io::run(&cfg, &consts)?;
        let mut tables = Vec::with_capacity(result.tables.len());
        for t in &result.tables {
            tables.push(serde_json::from_str::<serde_json::Value>(&t.to_json()?).map_err(Error::from)?);
        }
        let documents: serde_json::Map<String, serde_json::Value> =
            result.documents.into_iter().map(|(k, v)| (k, serde_json::Value::String(v))).collect();
        let doc = serde_json::json!({ "tables": tables, "documents": documents });
        *out = into_c_string(doc.to_string())?;
        Ok(())
    })
}

/// Runs a configuration, writes its outputs to the configured directory and returns the
/// run manifest as a new JSON string. `c` may be NULL for the built-in constants.
#[no_mangle]
pub unsafe extern "C" fn collapse_lab_execute(
    config_json: *const c_char,
    c: *const CollapseLabConstants,
    manifest_out: *mut *mut c_char,
) -> CollapseLabStatus {
    guard(|| {
        let out = out_ref(manifest_out)?;
        let cfg = io::parse_config(in_str(config_json, "config JSON")?)?;
        let consts = c.as_ref().map_or_else(PhysicalConstants::codata, |c| c.0.clone());
        let manifest = io::execute(&cfg, &consts)?;
        *out = into_c_string(serde_json::to_string(&manifest).map_err(Error::from)?)?;
        Ok(())
    })
}
