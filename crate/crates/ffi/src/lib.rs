//! C interface to the `crn-game` simulator.
//!
//! Scenarios are opaque handles created by `crn_scenario_generate` or
//! `crn_scenario_load` and released with `crn_scenario_free`. Every fallible
//! call returns a `CrnStatus`; on failure `crn_last_error_message` describes
//! the most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use crn_game::units::{db_to_linear, dbm_to_watts, linear_to_db, watts_to_dbm};
use crn_game::{Error, GameConfig, GameKind, Scenario, ScenarioParams};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidParams = 3,
    Generation = 4,
    Io = 5,
    Parse = 6,
    Invariant = 7,
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrnGame {
    Llg = 0,
    Lfg = 1,
    Pfg = 2,
    Clg = 3,
}

/// Scenario generation parameters. Powers and thresholds are logarithmic.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CrnParams {
    pub n_nodes: usize,
    pub side_length: f64,
    pub n_channels: usize,
    pub region_size: f64,
    pub channel_subset_min: usize,
    pub channel_subset_max: usize,
    pub p_max_dbm: f64,
    pub q_levels: usize,
    pub path_loss_exp: f64,
    pub sinr_threshold_db: f64,
    pub noise_power_dbm: f64,
    pub max_hops: usize,
    pub n_flows: usize,
    pub seed: u64,
}

/// Outcome of one game run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CrnRunMetrics {
    pub flows_requested: usize,
    pub flows_active: usize,
    /// NaN when no flow is active.
    pub mean_links_per_active_flow: f64,
    pub normalized_flow_steps: f64,
    pub cycles: usize,
    pub converged: bool,
}

/// Opaque scenario handle.
pub struct CrnScenario(Scenario);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CrnStatus {
    match err {
        Error::InvalidParams { .. } | Error::InvalidStrategy { .. } => CrnStatus::InvalidParams,
        Error::Generation(_) => CrnStatus::Generation,
        Error::Io { .. } | Error::Csv(_) => CrnStatus::Io,
        Error::Parse { .. } => CrnStatus::Parse,
        Error::Invariant { .. } => CrnStatus::Invariant,
        _ => CrnStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guarded(f: impl FnOnce() -> Result<(), (CrnStatus, String)>) -> CrnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrnStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {what}"));
            CrnStatus::Internal
        }
    }
}

fn lib_err(err: Error) -> (CrnStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (CrnStatus, String) {
    (CrnStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a str, (CrnStatus, String)> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map_err(|_| (CrnStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

impl From<&ScenarioParams> for CrnParams {
    fn from(p: &ScenarioParams) -> Self {
        CrnParams {
            n_nodes: p.n_nodes,
            side_length: p.side_length,
            n_channels: p.n_channels,
            region_size: p.region_size,
            channel_subset_min: p.channel_subset_min,
            channel_subset_max: p.channel_subset_max,
            p_max_dbm: watts_to_dbm(p.p_max),
            q_levels: p.q_levels,
            path_loss_exp: p.path_loss_exp,
            sinr_threshold_db: linear_to_db(p.sinr_threshold),
            noise_power_dbm: watts_to_dbm(p.noise_power),
            max_hops: p.max_hops,
            n_flows: p.n_flows,
            seed: p.seed,
        }
    }
}

impl From<&CrnParams> for ScenarioParams {
    fn from(p: &CrnParams) -> Self {
        ScenarioParams {
            n_nodes: p.n_nodes,
            side_length: p.side_length,
            n_channels: p.n_channels,
            region_size: p.region_size,
            channel_subset_min: p.channel_subset_min,
            channel_subset_max: p.channel_subset_max,
            p_max: dbm_to_watts(p.p_max_dbm),
            q_levels: p.q_levels,
            path_loss_exp: p.path_loss_exp,
            sinr_threshold: db_to_linear(p.sinr_threshold_db),
            noise_power: dbm_to_watts(p.noise_power_dbm),
            max_hops: p.max_hops,
            n_flows: p.n_flows,
            seed: p.seed,
        }
    }
}

fn game_kind(code: u32) -> Option<GameKind> {
    Some(match code {
        c if c == CrnGame::Llg as u32 => GameKind::Llg,
        c if c == CrnGame::Lfg as u32 => GameKind::Lfg,
        c if c == CrnGame::Pfg as u32 => GameKind::Pfg,
        c if c == CrnGame::Clg as u32 => GameKind::Clg,
        _ => return None,
    })
}

/// Message of the last failed call on this thread, or NULL if none failed.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fills `out` with the default simulation parameters (200 nodes, 10 flows).
///
/// # Safety
/// `out` must be NULL or point to writable memory for one `CrnParams`.
#[no_mangle]
pub unsafe extern "C" fn crn_params_default(out: *mut CrnParams) -> CrnStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(CrnParams::from(&ScenarioParams::default()));
        Ok(())
    })
}

/// Generates a random scenario. On success `*out` owns a new handle.
///
/// # Safety
/// `params` must be NULL or point to a valid `CrnParams`; `out` must be NULL
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_generate(
    params: *const CrnParams,
    out: *mut *mut CrnScenario,
) -> CrnStatus {
    guarded(|| {
        if params.is_null() {
            return Err(null("params"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let scenario =
            crn_game::generate_scenario(&ScenarioParams::from(&*params)).map_err(lib_err)?;
        out.write(Box::into_raw(Box::new(CrnScenario(scenario))));
        Ok(())
    })
}

/// Reads a scenario file. On success `*out` owns a new handle.
///
/// # Safety
/// `path` must be NULL or a NUL-terminated string; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_load(
    path: *const c_char,
    out: *mut *mut CrnScenario,
) -> CrnStatus {
    guarded(|| {
        let path = path_arg(path)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let scenario = crn_game::load_scenario(path).map_err(lib_err)?;
        out.write(Box::into_raw(Box::new(CrnScenario(scenario))));
        Ok(())
    })
}

/// Writes `scenario` to `path` as JSON.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `path` must be NULL or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_save(
    scenario: *const CrnScenario,
    path: *const c_char,
) -> CrnStatus {
    guarded(|| {
        let Some(s) = scenario.as_ref() else {
            return Err(null("scenario"));
        };
        crn_game::save_scenario(&s.0, path_arg(path)?).map_err(lib_err)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `scenario` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_free(scenario: *mut CrnScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Parameters the scenario was built with.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_params(
    scenario: *const CrnScenario,
    out: *mut CrnParams,
) -> CrnStatus {
    guarded(|| {
        let Some(s) = scenario.as_ref() else {
            return Err(null("scenario"));
        };
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(CrnParams::from(s.0.params()));
        Ok(())
    })
}

/// Number of nodes; 0 for NULL.
///
/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_node_count(scenario: *const CrnScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.nodes().len())
}

/// Number of flows; 0 for NULL.
///
/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_flow_count(scenario: *const CrnScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.flows().len())
}

/// Number of directed links over all flows; 0 for NULL.
///
/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_link_count(scenario: *const CrnScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.links().len())
}

/// Plays `game` (a `CrnGame` value) on `scenario` from the all-OFF profile.
/// `max_cycles` and `search_node_cap` of 0 select the defaults.
///
/// # Safety
/// `scenario` must be NULL or a live handle; `out` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn crn_run_game(
    scenario: *const CrnScenario,
    game: u32,
    max_cycles: usize,
    search_node_cap: u64,
    out: *mut CrnRunMetrics,
) -> CrnStatus {
    guarded(|| {
        let Some(s) = scenario.as_ref() else {
            return Err(null("scenario"));
        };
        if out.is_null() {
            return Err(null("out"));
        }
        let Some(kind) = game_kind(game) else {
            return Err((
                CrnStatus::InvalidArgument,
                format!("unknown game code {game}"),
            ));
        };
        let mut config = GameConfig::new(kind);
        if max_cycles > 0 {
            config.max_cycles = max_cycles;
        }
        if search_node_cap > 0 {
            config.search_node_cap = search_node_cap;
        }
        let run = crn_game::run_game(&s.0, &config).map_err(lib_err)?;
        out.write(CrnRunMetrics {
            flows_requested: run.metrics.flows_requested,
            flows_active: run.metrics.flows_active,
            mean_links_per_active_flow: run.metrics.mean_links_per_active_flow.unwrap_or(f64::NAN),
            normalized_flow_steps: run.metrics.normalized_flow_steps,
            cycles: run.trajectory.cycles,
            converged: run.metrics.converged,
        });
        Ok(())
    })
}
