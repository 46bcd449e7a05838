//! Line-delimited JSON log records on stderr.

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use log::{Level, LevelFilter, Log, Metadata, Record};
use serde_json::{json, Value};

pub const LOG_ENV: &str = "CRISP_LOG";

struct JsonLogger {
    start: Instant,
    level: LevelFilter,
}

static LOGGER: OnceLock<JsonLogger> = OnceLock::new();

impl Log for JsonLogger {
    fn enabled(&self, m: &Metadata) -> bool {
        m.level() <= self.level
    }

    fn log(&self, r: &Record) {
        if self.enabled(r.metadata()) {
            let rec = json!({
                "t_ms": self.start.elapsed().as_secs_f64() * 1e3,
                "level": r.level().as_str().to_ascii_lowercase(),
                "target": r.target(),
                "msg": r.args().to_string(),
            });
            emit(&rec);
        }
    }

    fn flush(&self) {}
}

fn emit(v: &Value) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{v}");
}

/// Installs the logger; the level comes from `CRISP_LOG` (default `info`)
/// unless `quiet`, which keeps warnings and errors only.
pub fn init(quiet: bool) {
    let level = if quiet {
        LevelFilter::Warn
    } else {
        std::env::var(LOG_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(LevelFilter::Info)
    };
    let logger = LOGGER.get_or_init(|| JsonLogger {
        start: Instant::now(),
        level,
    });
    if log::set_logger(logger).is_ok() {
        log::set_max_level(level);
    }
}

/// A structured record with extra fields, logged at info level.
pub fn event(kind: &str, fields: Value) {
    if !log::log_enabled!(Level::Info) {
        return;
    }
    let mut rec = json!({ "event": kind });
    if let (Some(dst), Value::Object(src)) = (rec.as_object_mut(), fields) {
        dst.extend(src);
    }
    if let Some(l) = LOGGER.get() {
        if let Some(obj) = rec.as_object_mut() {
            obj.insert("t_ms".into(), json!(l.start.elapsed().as_secs_f64() * 1e3));
            obj.insert("level".into(), json!("info"));
        }
    }
    emit(&rec);
}
