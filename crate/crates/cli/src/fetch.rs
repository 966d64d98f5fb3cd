//! Optional dataset download with checksum verification.
//!
//! The cache-hit and checksum paths work in any build; the actual network
//! download needs the `fetch` feature. A failed checksum never leaves a
//! partial file behind: downloads land in a temp file and only rename into
//! place after verifying.

use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

#[derive(Debug)]
pub enum FetchOutcome {
    /// Destination already present with a matching checksum (or none given).
    Cached(PathBuf),
    /// Freshly downloaded and verified.
    #[cfg_attr(not(feature = "fetch"), allow(dead_code))]
    Downloaded(PathBuf),
    /// Offline mode requested and the file is not cached.
    SkippedOffline,
}

#[derive(Debug)]
pub enum FetchError {
    ChecksumMismatch {
        expected: String,
        got: String,
        path: PathBuf,
    },
    BuiltWithoutFetch,
    Io(std::io::Error),
    #[cfg(feature = "fetch")]
    Http(reqwest::Error),
}

impl fmt::Display for FetchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FetchError::ChecksumMismatch {
                expected,
                got,
                path,
            } => write!(
                f,
                "checksum mismatch for {}: expected {expected}, got {got}",
                path.display()
            ),
            FetchError::BuiltWithoutFetch => write!(
                f,
                "this binary was built without the `fetch` feature; rebuild with \
                 `--features fetch` or place the archive manually"
            ),
            FetchError::Io(e) => write!(f, "io: {e}"),
            #[cfg(feature = "fetch")]
            FetchError::Http(e) => write!(f, "http: {e}"),
        }
    }
}

impl std::error::Error for FetchError {}

impl From<std::io::Error> for FetchError {
    fn from(e: std::io::Error) -> Self {
        FetchError::Io(e)
    }
}

pub fn sha256_file(path: &Path) -> Result<String, FetchError> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Fetch `url` into `dest`. A cached file with a matching checksum is never
/// re-downloaded; offline mode skips with a message instead of touching the
/// network.
pub fn fetch_dataset(
    url: &str,
    dest: &Path,
    expected_sha256: Option<&str>,
    offline: bool,
) -> Result<FetchOutcome, FetchError> {
    if dest.exists() {
        match expected_sha256 {
            None => return Ok(FetchOutcome::Cached(dest.to_path_buf())),
            Some(expected) => {
                let got = sha256_file(dest)?;
                if got.eq_ignore_ascii_case(expected) {
                    return Ok(FetchOutcome::Cached(dest.to_path_buf()));
                }
                if offline {
                    return Err(FetchError::ChecksumMismatch {
                        expected: expected.to_string(),
                        got,
                        path: dest.to_path_buf(),
                    });
                }
                // stale cache: fall through to re-download
            }
        }
    }
    if offline {
        return Ok(FetchOutcome::SkippedOffline);
    }
    download(url, dest, expected_sha256)
}

#[cfg(feature = "fetch")]
fn download(url: &str, dest: &Path, expected_sha256: Option<&str>) -> Result<FetchOutcome, FetchError> {
    use std::io::Write;
    let dir = dest.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    let client = reqwest::blocking::Client::builder()
        .timeout(std::time::Duration::from_secs(600))
        .build()
        .map_err(FetchError::Http)?;
    let mut response = client
        .get(url)
        .send()
        .and_then(|r| r.error_for_status())
        .map_err(FetchError::Http)?;
    std::io::copy(&mut response, tmp.as_file_mut())?;
    tmp.flush()?;
    if let Some(expected) = expected_sha256 {
        let got = sha256_file(tmp.path())?;
        if !got.eq_ignore_ascii_case(expected) {
            // tmp drops here, removing the partial/corrupt download
            return Err(FetchError::ChecksumMismatch {
                expected: expected.to_string(),
                got,
                path: dest.to_path_buf(),
            });
        }
    }
    tmp.persist(dest).map_err(|e| FetchError::Io(e.error))?;
    Ok(FetchOutcome::Downloaded(dest.to_path_buf()))
}

#[cfg(not(feature = "fetch"))]
fn download(_url: &str, _dest: &Path, _expected: Option<&str>) -> Result<FetchOutcome, FetchError> {
    Err(FetchError::BuiltWithoutFetch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cached_file_with_matching_checksum_is_not_redownloaded() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("archive.zip");
        fs::write(&dest, b"payload").unwrap();
        let sum = sha256_file(&dest).unwrap();
        let outcome = fetch_dataset("http://unreachable.invalid/x", &dest, Some(&sum), false).unwrap();
        assert!(matches!(outcome, FetchOutcome::Cached(_)));
    }

    #[test]
    fn offline_checksum_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("archive.zip");
        fs::write(&dest, b"corrupt").unwrap();
        let err = fetch_dataset("http://unreachable.invalid/x", &dest, Some("00ff"), true)
            .unwrap_err();
        assert!(matches!(err, FetchError::ChecksumMismatch { .. }));
        // the cached file is left for inspection; nothing else was written
        assert!(dest.exists());
    }

    #[test]
    fn offline_without_cache_skips_with_message() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("missing.zip");
        let outcome = fetch_dataset("http://unreachable.invalid/x", &dest, None, true).unwrap();
        assert!(matches!(outcome, FetchOutcome::SkippedOffline));
        assert!(!dest.exists());
    }

    #[cfg(not(feature = "fetch"))]
    #[test]
    fn download_requires_the_fetch_feature() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("missing.zip");
        let err = fetch_dataset("http://unreachable.invalid/x", &dest, None, false).unwrap_err();
        assert!(matches!(err, FetchError::BuiltWithoutFetch));
    }
}
