//! C ABI over the `ccnsim` simulator.
//!
//! Conventions:
//! * Objects are opaque handles created by `ccn_*_new`/`_parse`/`_builtin`
//!   style constructors and released with the matching `_free`.
//! * Fallible calls return a [`CcnStatus`] and write results through out
//!   pointers. On failure, [`ccn_last_error`] returns a description for the
//!   calling thread.
//! * Strings returned as `char *` are owned by the caller and must be
//!   released with [`ccn_string_free`]. `const char *` results are static.
//! * Panics never cross the boundary; they surface as `CCN_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use ccnsim::cli;
use ccnsim::config::{presets, ScenarioConfig};
use ccnsim::engine::{self, MetricsReport};
use ccnsim::topology::{builtin, NodeId, Topology};

/// Result codes of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    NotFound = 5,
    RunFailed = 6,
    BufferTooSmall = 7,
    /// The requested metric has no value (nothing was delivered).
    Undefined = 8,
    Panic = 9,
}

/// Network graph with per-link delays.
pub struct CcnTopology(Topology);

/// One scenario configuration.
pub struct CcnScenario(ScenarioConfig);

/// Metrics of one finished run.
pub struct CcnReport(MetricsReport);

/// Aggregate counters of a run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CcnCounters {
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub producer_hits: u64,
    pub chunk_interests: u64,
    pub deliveries: u64,
    pub hops_total: u64,
    pub replications: u64,
    pub opportunistic_insertions: u64,
    pub object_requests: u64,
    pub events: u64,
    pub seed: u64,
    pub producer: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(CcnStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(status: CcnStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, msg.into()))
}

/// Runs `body`, records any error for `ccn_last_error` and maps it to a code.
fn guard(body: impl FnOnce() -> FfiResult<()>) -> CcnStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => CcnStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CcnStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(CcnStatus::NullPointer, format!("{what} is NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(CcnStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().map_or_else(
        || fail(CcnStatus::NullPointer, format!("{what} is NULL")),
        Ok,
    )
}

unsafe fn write_out<T>(out: *mut T, value: T) -> FfiResult<()> {
    if out.is_null() {
        return fail(CcnStatus::NullPointer, "output pointer is NULL");
    }
    out.write(value);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or NULL. Free with
/// `ccn_string_free`.
#[no_mangle]
pub extern "C" fn ccn_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |m| m.clone().into_raw())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn ccn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, static.
#[no_mangle]
pub extern "C" fn ccn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// CSV header matching `ccn_report_csv_row`, static.
#[no_mangle]
pub extern "C" fn ccn_csv_header() -> *const c_char {
    static HEADER: &str = concat!(
        "scenario,strategy,policy,cache_bytes,scale,seed,cache_hit_ratio,",
        "avg_hops,avg_delay_ms,replications,events\0"
    );
    HEADER.as_ptr().cast()
}

// ---- topology ----

/// Loads a builtin topology ("abilene", "dtelecom").
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_topology_builtin(
    name: *const c_char,
    out: *mut *mut CcnTopology,
) -> CcnStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let topo = match builtin::load(name) {
            Some(Ok(t)) => t,
            Some(Err(e)) => return fail(CcnStatus::Parse, e.to_string()),
            None => return fail(CcnStatus::NotFound, format!("no builtin topology {name:?}")),
        };
        write_out(out, Box::into_raw(Box::new(CcnTopology(topo))))
    })
}

/// Parses topology text (`a b delay_ms` per line, `#` comments).
///
/// # Safety
/// `name` and `text` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_topology_parse(
    name: *const c_char,
    text: *const c_char,
    out: *mut *mut CcnTopology,
) -> CcnStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let text = str_arg(text, "text")?;
        let topo =
            Topology::parse(name, text).or_else(|e| fail(CcnStatus::Parse, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(CcnTopology(topo))))
    })
}

/// # Safety
/// `topo` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ccn_topology_free(topo: *mut CcnTopology) {
    if !topo.is_null() {
        drop(Box::from_raw(topo));
    }
}

/// Number of routers; 0 for NULL.
///
/// # Safety
/// `topo` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccn_topology_node_count(topo: *const CcnTopology) -> usize {
    topo.as_ref().map_or(0, |t| t.0.node_count())
}

/// Writes one betweenness score per router into `out[0..len)`.
/// `len` must be at least the node count.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ccn_topology_betweenness(
    topo: *const CcnTopology,
    out: *mut f64,
    len: usize,
) -> CcnStatus {
    guard(|| {
        let t = handle(topo, "topology")?;
        let n = t.0.node_count();
        if out.is_null() {
            return fail(CcnStatus::NullPointer, "output buffer is NULL");
        }
        if len < n {
            return fail(
                CcnStatus::BufferTooSmall,
                format!("need {n} slots, got {len}"),
            );
        }
        let scores = t.0.betweenness();
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(scores.scores());
        Ok(())
    })
}

/// Canonical shortest path from `from` to `to`, endpoints included.
/// `*out_len` receives the path length even when `cap` is too small.
///
/// # Safety
/// `out` must point to `cap` writable integers; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_topology_shortest_path(
    topo: *const CcnTopology,
    from: u32,
    to: u32,
    out: *mut u32,
    cap: usize,
    out_len: *mut usize,
) -> CcnStatus {
    guard(|| {
        let t = handle(topo, "topology")?;
        let path =
            t.0.shortest_path(NodeId(from), NodeId(to))
                .or_else(|e| fail(CcnStatus::InvalidArgument, e.to_string()))?;
        write_out(out_len, path.len())?;
        if cap < path.len() {
            return fail(
                CcnStatus::BufferTooSmall,
                format!("need {} slots, got {cap}", path.len()),
            );
        }
        if out.is_null() {
            return fail(CcnStatus::NullPointer, "output buffer is NULL");
        }
        for (i, n) in path.iter().enumerate() {
            out.add(i).write(n.0);
        }
        Ok(())
    })
}

// ---- scenarios ----

/// Default scenario (small custom setup on Abilene).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_scenario_new(out: *mut *mut CcnScenario) -> CcnStatus {
    guard(|| {
        write_out(
            out,
            Box::into_raw(Box::new(CcnScenario(ScenarioConfig::default()))),
        )
    })
}

/// Parses a `key = value` scenario document.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_scenario_parse(
    text: *const c_char,
    out: *mut *mut CcnScenario,
) -> CcnStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let cfg = ScenarioConfig::parse(text).or_else(|e| fail(CcnStatus::Parse, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(CcnScenario(cfg))))
    })
}

/// One of the six presets: isp_100GB, isp_1TB, vod_25GB, vod_250GB,
/// osn_10GB, osn_100GB.
///
/// # Safety
/// `name` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_scenario_preset(
    name: *const c_char,
    out: *mut *mut CcnScenario,
) -> CcnStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let Some((_, cfg)) = presets::all().into_iter().find(|(stem, _)| stem == name) else {
            return fail(CcnStatus::NotFound, format!("no preset {name:?}"));
        };
        write_out(out, Box::into_raw(Box::new(CcnScenario(cfg))))
    })
}

/// Sets one key as in a scenario file.
///
/// # Safety
/// `scenario` must be a live handle; `key`, `value` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ccn_scenario_set(
    scenario: *mut CcnScenario,
    key: *const c_char,
    value: *const c_char,
) -> CcnStatus {
    guard(|| {
        let s = scenario
            .as_mut()
            .map_or_else(|| fail(CcnStatus::NullPointer, "scenario is NULL"), Ok)?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        s.0.set(key, value)
            .or_else(|e| fail(CcnStatus::InvalidArgument, e.to_string()))
    })
}

/// The scenario as a `key = value` document, or NULL for a NULL handle.
/// Free with `ccn_string_free`.
///
/// # Safety
/// `scenario` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccn_scenario_to_string(scenario: *const CcnScenario) -> *mut c_char {
    scenario
        .as_ref()
        .map_or(ptr::null_mut(), |s| owned_string(s.0.to_config_string()))
}

/// Resolves the scenario's topology: a builtin name, else a file path
/// relative to `base_dir` (which may be NULL).
///
/// # Safety
/// `scenario` must be a live handle, `base_dir` NULL or NUL-terminated,
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_scenario_load_topology(
    scenario: *const CcnScenario,
    base_dir: *const c_char,
    out: *mut *mut CcnTopology,
) -> CcnStatus {
    guard(|| {
        let s = handle(scenario, "scenario")?;
        let base = if base_dir.is_null() {
            None
        } else {
            Some(Path::new(str_arg(base_dir, "base_dir")?))
        };
        let topo =
            s.0.load_topology(base)
                .or_else(|e| fail(CcnStatus::NotFound, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(CcnTopology(topo))))
    })
}

/// # Safety
/// `scenario` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ccn_scenario_free(scenario: *mut CcnScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

// ---- runs and reports ----

/// Runs the scenario on `topo` to completion.
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_run(
    scenario: *const CcnScenario,
    topo: *const CcnTopology,
    out: *mut *mut CcnReport,
) -> CcnStatus {
    guard(|| {
        let s = handle(scenario, "scenario")?;
        let t = handle(topo, "topology")?;
        let report =
            engine::run(&s.0, &t.0).or_else(|e| fail(CcnStatus::RunFailed, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(CcnReport(report))))
    })
}

/// # Safety
/// `report` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn ccn_report_free(report: *mut CcnReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

unsafe fn metric(
    report: *const CcnReport,
    out: *mut f64,
    get: fn(&MetricsReport) -> Option<f64>,
    what: &str,
) -> CcnStatus {
    guard(|| {
        let r = handle(report, "report")?;
        match get(&r.0) {
            Some(v) => write_out(out, v),
            None => fail(
                CcnStatus::Undefined,
                format!("{what} undefined: nothing delivered"),
            ),
        }
    })
}

/// Share of chunk requests served from caches. `CCN_STATUS_UNDEFINED` when
/// no request was measured.
///
/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_report_cache_hit_ratio(
    report: *const CcnReport,
    out: *mut f64,
) -> CcnStatus {
    metric(
        report,
        out,
        MetricsReport::cache_hit_ratio,
        "cache hit ratio",
    )
}

/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_report_avg_hops(report: *const CcnReport, out: *mut f64) -> CcnStatus {
    metric(report, out, MetricsReport::avg_hops, "average hops")
}

/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_report_avg_delay_ms(
    report: *const CcnReport,
    out: *mut f64,
) -> CcnStatus {
    metric(report, out, MetricsReport::avg_delay_ms, "average delay")
}

/// # Safety
/// `report` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_report_counters(
    report: *const CcnReport,
    out: *mut CcnCounters,
) -> CcnStatus {
    guard(|| {
        let r = &handle(report, "report")?.0;
        write_out(
            out,
            CcnCounters {
                cache_hits: r.cache_hits,
                cache_misses: r.cache_misses,
                producer_hits: r.producer_hits,
                chunk_interests: r.chunk_interests,
                deliveries: r.deliveries,
                hops_total: r.hops_total,
                replications: r.replication_count,
                opportunistic_insertions: r.opportunistic_insertions,
                object_requests: r.object_requests,
                events: r.events_processed,
                seed: r.seed,
                producer: r.producer.0,
            },
        )
    })
}

/// The report as one CSV row (no newline), or NULL for a NULL handle.
/// Free with `ccn_string_free`.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ccn_report_csv_row(report: *const CcnReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| owned_string(cli::csv_row(&r.0)))
}

/// Daily traffic saved, in decimal TB rounded to 0.1.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ccn_traffic_savings(
    daily_volume_tb: f64,
    hit_ratio: f64,
    out: *mut f64,
) -> CcnStatus {
    guard(|| {
        let v = engine::traffic_savings(daily_volume_tb, hit_ratio)
            .or_else(|e| fail(CcnStatus::InvalidArgument, e.to_string()))?;
        write_out(out, v)
    })
}
