use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed WAV header: {field}: {detail}")]
    MalformedWav { field: &'static str, detail: String },

    #[error("unsupported WAV codec: format tag 0x{format_tag:04x} with {bits} bits per sample (only PCM16 and float32 are accepted)")]
    UnsupportedCodec { format_tag: u16, bits: u16 },

    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),

    #[error("{name} factor {value} outside [{min}, {max}]")]
    FactorOutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("input too short: {len} samples, need at least {min}")]
    InputTooShort { len: usize, min: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("manifest line {line}: {detail}")]
    Manifest { line: usize, detail: String },

    #[error("confusion matrix: {0}")]
    Confusion(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
