//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.

use std::io::Write;
use std::sync::{Mutex, MutexGuard};
use std::time::Duration;

static SERIAL: Mutex<()> = Mutex::new(());

/// Holds a global lock so timed checks do not compete for cores.
pub fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

/// Writes one verdict line straight to stdout, bypassing the test harness capture.
pub fn verdict(index: &str, title: &str, passed: bool, elapsed: Duration, detail: &str) {
    let line = format!(
        "acceptance {index:<3} {title:<34} {}  ({:.1} s) {detail}\n",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}
