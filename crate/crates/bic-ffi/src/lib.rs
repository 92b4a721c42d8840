//! C ABI over `bic-core`.
//!
//! Every entry point returns a [`BicStatus`]; results go through out
//! pointers. Objects cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. The message of the last
//! failure on the calling thread is available from
//! [`bic_last_error_message`].

use bic_core::poles::{approx_pole, critical_distance, find_pole};
use bic_core::spectrum::{probability_approximant, resonant_energy, solve_bic, BoundStateInContinuum, ProbabilityClass, SolveMode};
use bic_core::{BicError, EmitterArrayParams, ParitySector, Sheet, Tolerances};
use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BicStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Continuation = 3,
    Accuracy = 4,
    SizeMismatch = 5,
    Decomposition = 6,
    Label = 7,
    Config = 8,
    NoConvergence = 9,
    OutOfRange = 10,
    Panic = 11,
}

/// Sector selector; `BIC_SECTOR_BOTH` is accepted only by [`bic_solve`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BicSector {
    Antisymmetric = 0,
    Symmetric = 1,
    Both = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BicSheet {
    First = 1,
    Second = 2,
    Third = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BicMode {
    Full = 0,
    LargeSpacing = 1,
}

/// Opaque system definition.
pub struct BicParams(EmitterArrayParams);

/// Opaque list of solved states.
pub struct BicStateList(Vec<BoundStateInContinuum>);

/// Scalar summary of one state.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BicStateSummary {
    pub n: usize,
    pub energy: f64,
    pub epsilon: f64,
    pub chi: f64,
    pub p: f64,
    pub field_norm: f64,
    pub constraint_residual: f64,
    /// 0 antisymmetric, 1 symmetric, 2 none
    pub sector: i32,
    pub nu_nearest: u32,
    pub exact_resonance: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BicCriticalPoint {
    pub d_c: f64,
    pub e_c: f64,
    pub chi_c: f64,
    pub epsilon_c: f64,
    /// negative when the sheet poles could not be polished
    pub merge_gap: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &BicError) -> BicStatus {
    match e {
        BicError::Domain(_) => BicStatus::Domain,
        BicError::Continuation { .. } => BicStatus::Continuation,
        BicError::Accuracy { .. } => BicStatus::Accuracy,
        BicError::SizeMismatch { .. } => BicStatus::SizeMismatch,
        BicError::Decomposition(_) => BicStatus::Decomposition,
        BicError::Label(_) => BicStatus::Label,
        BicError::Config(_) => BicStatus::Config,
        BicError::NoConvergence { .. } => BicStatus::NoConvergence,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BicStatus>) -> BicStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BicStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            BicStatus::Panic
        }
    }
}

fn fail(e: BicError) -> BicStatus {
    let s = status_of(&e);
    set_error(e.to_string());
    s
}

fn null() -> BicStatus {
    set_error("null pointer argument".into());
    BicStatus::NullPointer
}

fn sector_of(s: BicSector) -> Result<ParitySector, BicStatus> {
    match s {
        BicSector::Antisymmetric => Ok(ParitySector::Antisymmetric),
        BicSector::Symmetric => Ok(ParitySector::Symmetric),
        BicSector::Both => {
            set_error("a single sector is required".into());
            Err(BicStatus::Label)
        }
    }
}

fn sheet_of(s: BicSheet) -> Sheet {
    match s {
        BicSheet::First => Sheet::First,
        BicSheet::Second => Sheet::Second,
        BicSheet::Third => Sheet::Third,
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len − 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn bic_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bic_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Creates a parameter handle.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn bic_params_new(n: usize, epsilon: f64, d: f64, gamma: f64, out: *mut *mut BicParams) -> BicStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let p = EmitterArrayParams::new(n, epsilon, d, gamma).map_err(fail)?;
        *out = Box::into_raw(Box::new(BicParams(p)));
        Ok(())
    })
}

/// # Safety
/// `params` must be null or a handle from [`bic_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bic_params_free(params: *mut BicParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// E_ν(d) = √(1 + ν²π²/d²).
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bic_resonant_energy(nu: u32, d: f64, out: *mut f64) -> BicStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = resonant_energy(nu, d).map_err(fail)?;
        Ok(())
    })
}

/// Solves for the BICs of `params` (n, d, γ) with energies in
/// [e_min, e_max]. ε of `params` is not used.
///
/// # Safety
/// `params` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn bic_solve(
    params: *const BicParams,
    sector: BicSector,
    mode: BicMode,
    e_min: f64,
    e_max: f64,
    out: *mut *mut BicStateList,
) -> BicStatus {
    guard(|| {
        if params.is_null() || out.is_null() {
            return Err(null());
        }
        let sec = match sector {
            BicSector::Both => None,
            s => Some(sector_of(s)?),
        };
        let mode = match mode {
            BicMode::Full => SolveMode::Full,
            BicMode::LargeSpacing => SolveMode::LargeSpacing,
        };
        let r = solve_bic(&(*params).0, sec, mode, (e_min, e_max), &[], &Tolerances::default()).map_err(fail)?;
        *out = Box::into_raw(Box::new(BicStateList(r.states)));
        Ok(())
    })
}

/// # Safety
/// `list` must be a live handle from [`bic_solve`].
#[no_mangle]
pub unsafe extern "C" fn bic_state_list_len(list: *const BicStateList) -> usize {
    if list.is_null() {
        0
    } else {
        (&*list).0.len()
    }
}

/// # Safety
/// `list` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bic_state_get(list: *const BicStateList, index: usize, out: *mut BicStateSummary) -> BicStatus {
    guard(|| {
        if list.is_null() || out.is_null() {
            return Err(null());
        }
        let Some(s) = (&*list).0.get(index) else {
            set_error(format!("state index {index} out of range"));
            return Err(BicStatus::OutOfRange);
        };
        *out = BicStateSummary {
            n: s.n,
            energy: s.energy,
            epsilon: s.epsilon,
            chi: s.chi,
            p: s.p,
            field_norm: s.field_norm,
            constraint_residual: s.constraint_residual,
            sector: match s.sector {
                Some(ParitySector::Antisymmetric) => 0,
                Some(ParitySector::Symmetric) => 1,
                None => 2,
            },
            nu_nearest: s.nu_nearest,
            exact_resonance: s.exact_resonance,
        };
        Ok(())
    })
}

/// Writes the n complex amplitudes of state `index` into `re` and `im`,
/// each of length at least `len`.
///
/// # Safety
/// `list` must be a live handle; `re` and `im` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn bic_state_amplitudes(list: *const BicStateList, index: usize, re: *mut f64, im: *mut f64, len: usize) -> BicStatus {
    guard(|| {
        if list.is_null() || re.is_null() || im.is_null() {
            return Err(null());
        }
        let Some(s) = (&*list).0.get(index) else {
            set_error(format!("state index {index} out of range"));
            return Err(BicStatus::OutOfRange);
        };
        if len < s.amplitudes.len() {
            set_error(format!("buffer of {len} for {} amplitudes", s.amplitudes.len()));
            return Err(BicStatus::SizeMismatch);
        }
        for (k, a) in s.amplitudes.iter().enumerate() {
            *re.add(k) = a.re;
            *im.add(k) = a.im;
        }
        Ok(())
    })
}

/// # Safety
/// `list` must be null or a live handle from [`bic_solve`].
#[no_mangle]
pub unsafe extern "C" fn bic_state_list_free(list: *mut BicStateList) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}

/// Newton search for a pole of one sector block on `sheet`, from z0.
///
/// # Safety
/// `params` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bic_find_pole(
    params: *const BicParams,
    sector: BicSector,
    sheet: BicSheet,
    re0: f64,
    im0: f64,
    re: *mut f64,
    im: *mut f64,
) -> BicStatus {
    guard(|| {
        if params.is_null() || re.is_null() || im.is_null() {
            return Err(null());
        }
        let sec = sector_of(sector)?;
        let z0 = bic_core::C64::new(re0, im0);
        let r = find_pole(z0, &(*params).0, sec, sheet_of(sheet), &Tolerances::default()).map_err(fail)?;
        *re = r.z.re;
        *im = r.z.im;
        Ok(())
    })
}

/// Closed-form approximant of pole `index` of one sector.
///
/// # Safety
/// `params` must be a live handle; `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bic_approx_pole(params: *const BicParams, sector: BicSector, index: usize, re: *mut f64, im: *mut f64) -> BicStatus {
    guard(|| {
        if params.is_null() || re.is_null() || im.is_null() {
            return Err(null());
        }
        let z = approx_pole(&(*params).0, sector_of(sector)?, index, &Tolerances::default()).map_err(fail)?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Critical spacing of the nonperturbative pair between E_ν and E_{ν+1}.
///
/// # Safety
/// `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bic_critical_distance(n: usize, gamma: f64, nu: u32, out: *mut BicCriticalPoint) -> BicStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let c = critical_distance(n, gamma, nu, &Tolerances::default()).map_err(fail)?;
        *out = BicCriticalPoint { d_c: c.d_c, e_c: c.e_c, chi_c: c.chi_c, epsilon_c: c.epsilon_c, merge_gap: c.merge_gap.unwrap_or(-1.0) };
        Ok(())
    })
}

/// Closed-form probability of a class given by its label (e.g. "n3-a").
///
/// # Safety
/// `class_label` must be a NUL-terminated string; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bic_probability_approximant(class_label: *const c_char, nu: u32, d: f64, gamma: f64, out: *mut f64) -> BicStatus {
    guard(|| {
        if class_label.is_null() || out.is_null() {
            return Err(null());
        }
        let label = CStr::from_ptr(class_label).to_str().map_err(|_| {
            set_error("class label is not UTF-8".into());
            BicStatus::Label
        })?;
        let class: ProbabilityClass = label.parse().map_err(fail)?;
        *out = probability_approximant(class, nu, d, gamma).map_err(fail)?;
        Ok(())
    })
}
