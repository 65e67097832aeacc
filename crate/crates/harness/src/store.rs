//! JSONL logs and on-disk layout of a results directory.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use omniplay::{create_env, EpisodeDriver, EpisodeRecord};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::attachments::Attachments;
use crate::error::{io_err, HarnessError, Result};

pub const EPISODES_FILE: &str = "episodes.jsonl";
pub const HUMAN_LOG_FILE: &str = "human_log.jsonl";
pub const WARMUP_LOG_FILE: &str = "warmups.jsonl";
pub const MATCHES_FILE: &str = "matches.jsonl";

/// Files a batch command owns inside its output directory.
const OWNED: [&str; 12] = [
    EPISODES_FILE,
    MATCHES_FILE,
    "run.toml",
    "tournament.toml",
    "scores.txt",
    "scores.json",
    "nps.txt",
    "nps.json",
    "tournament.txt",
    "tournament.json",
    "reliability.txt",
    "reliability.json",
];

/// Creates `dir`, refusing to clobber earlier results unless `force`, in
/// which case the owned files and the asset tree are removed.
pub fn prepare_output(dir: &Path, force: bool) -> Result<()> {
    let existing: Vec<PathBuf> = OWNED
        .iter()
        .map(|f| dir.join(f))
        .chain(std::iter::once(dir.join("assets")))
        .filter(|p| p.exists())
        .collect();
    if !existing.is_empty() {
        if !force {
            return Err(HarnessError::OutputExists(dir.to_path_buf()));
        }
        for p in existing {
            if p.is_dir() {
                fs::remove_dir_all(&p).map_err(io_err(&p))?;
            } else {
                fs::remove_file(&p).map_err(io_err(&p))?;
            }
        }
    }
    fs::create_dir_all(dir).map_err(io_err(dir))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|source| HarnessError::Jsonl {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Writes through a temporary sibling and renames, so readers never see a
/// half-written file.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let file = File::create(&tmp).map_err(io_err(&tmp))?;
        let mut w = BufWriter::new(file);
        for item in items {
            serde_json::to_writer(&mut w, item)?;
            w.write_all(b"\n").map_err(io_err(&tmp))?;
        }
        w.flush().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn append_jsonl<T: Serialize>(path: &Path, item: &T) -> Result<()> {
    let mut line = serde_json::to_vec(item)?;
    line.push(b'\n');
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    file.write_all(&line).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Episode logs under `input`: the file itself, or every `episodes.jsonl`
/// and `human_log.jsonl` below a directory, in path order. Warm-up logs are
/// never picked up.
pub fn episode_log_files(input: &Path) -> Result<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    let mut out = Vec::new();
    collect_named(input, &[EPISODES_FILE, HUMAN_LOG_FILE], &mut out)?;
    out.sort();
    Ok(out)
}

pub fn match_log_files(input: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    if input.is_dir() {
        collect_named(input, &[MATCHES_FILE], &mut out)?;
    } else if input.file_name().is_some_and(|n| n == MATCHES_FILE) {
        out.push(input.to_path_buf());
    }
    out.sort();
    Ok(out)
}

fn collect_named(dir: &Path, names: &[&str], out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(io_err(dir))?;
    for entry in entries {
        let path = entry.map_err(io_err(dir))?.path();
        if path.is_dir() {
            collect_named(&path, names, out)?;
        } else if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| names.contains(&n))
        {
            out.push(path);
        }
    }
    Ok(())
}

/// Re-simulates `record` and writes each step's observation to
/// `dir/step_NNNN/`: `frame.png`, `audio.wav` or `transcript.txt`, `video/`
/// frames with a manifest, and `prompt.txt`.
pub fn export_assets(record: &EpisodeRecord, dir: &Path) -> Result<usize> {
    let env = create_env(record.descriptor)?;
    let mut driver = EpisodeDriver::new(env, record.intervention.clone())?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_text(&dir.join("system_prompt.txt"), driver.system_prompt())?;
    for step in &record.steps {
        if driver.is_done() {
            break;
        }
        let obs = driver.observation().clone();
        let step_dir = dir.join(format!("step_{:04}", step.step_index));
        fs::create_dir_all(&step_dir).map_err(io_err(&step_dir))?;
        let att = Attachments::encode(&obs)?;
        write_text(&step_dir.join("prompt.txt"), &obs.turn_prompt())?;
        write_text(&step_dir.join("reply.txt"), &step.action.raw_text)?;
        if let Some(png) = &att.frame_png {
            let p = step_dir.join("frame.png");
            fs::write(&p, png).map_err(io_err(&p))?;
        }
        if let Some(wav) = &att.audio_wav {
            let p = step_dir.join("audio.wav");
            fs::write(&p, wav).map_err(io_err(&p))?;
        }
        if let Some(t) = &att.transcript {
            write_text(&step_dir.join("transcript.txt"), t)?;
        }
        if !att.video.is_empty() {
            let vdir = step_dir.join("video");
            fs::create_dir_all(&vdir).map_err(io_err(&vdir))?;
            let mut manifest = Vec::new();
            for (entry, png) in &att.video {
                let p = vdir.join(format!("{:03}.png", entry.index));
                fs::write(&p, png).map_err(io_err(&p))?;
                manifest.push(*entry);
            }
            write_json(&vdir.join("manifest.json"), &manifest)?;
        }
        driver.submit_envelope(step.action.clone());
    }
    Ok(record.steps.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_roundtrip_and_refusal() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(EPISODES_FILE);
        write_jsonl(&path, &[1u32, 2, 3]).unwrap();
        append_jsonl(&path, &4u32).unwrap();
        assert_eq!(read_jsonl::<u32>(&path).unwrap(), vec![1, 2, 3, 4]);
        assert!(matches!(
            prepare_output(dir.path(), false),
            Err(HarnessError::OutputExists(_))
        ));
        prepare_output(dir.path(), true).unwrap();
        assert!(!path.exists());
        prepare_output(dir.path(), false).unwrap();
    }

    #[test]
    fn malformed_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.jsonl");
        fs::write(&path, "1\n\n{oops\n").unwrap();
        match read_jsonl::<u32>(&path) {
            Err(HarnessError::Jsonl { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
