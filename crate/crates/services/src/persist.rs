use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Opens `path` for appending, creating parent directories.
pub fn open_append(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(OpenOptions::new().create(true).append(true).open(path)?)
}

pub fn append_line(file: &mut File, line: &str) -> Result<()> {
    file.write_all(format!("{line}\n").as_bytes())?;
    file.sync_data()?;
    Ok(())
}

/// Write to a sibling temp file, sync, then rename over `path`.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp)?;
    f.write_all(contents.as_bytes())?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_or_empty(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(String::new()),
        Err(e) => Err(e.into()),
    }
}

pub fn unix_time() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("hbat-persist-{}", std::process::id()));
        let p = dir.join("blocked.txt");
        atomic_write(&p, "a\n").unwrap();
        atomic_write(&p, "b\n").unwrap();
        assert_eq!(read_or_empty(&p).unwrap(), "b\n");
        assert!(!p.with_extension("tmp").exists());
        assert_eq!(read_or_empty(&dir.join("missing")).unwrap(), "");
        fs::remove_dir_all(dir).unwrap();
    }
}
