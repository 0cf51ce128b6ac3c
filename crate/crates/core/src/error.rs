use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("negative probability {value} at row {row}, column {col}")]
    NegativeProbability { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, outside the accepted tolerance around 1")]
    RowSumViolation { row: usize, sum: f64 },

    #[error(
        "matrix shape {rows}x{cols} is too small (need at least {min_rows} rows and 1 column)"
    )]
    BadShape {
        rows: usize,
        cols: usize,
        min_rows: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{matrices} similarity matrices but {weights} weights")]
    WeightCountMismatch { matrices: usize, weights: usize },

    #[error("need at least 2 non-empty clusters, found {k}")]
    TooFewClusters { k: usize },

    #[error("need more points than clusters: n = {n}, k = {k}")]
    TooFewPoints { n: usize, k: usize },

    #[error("cluster centroids coincide (min squared distance {min_sq_dist:e})")]
    CoincidentCentroids { min_sq_dist: f64 },

    #[error("no models supplied")]
    NoModels,

    #[error("fits disagree on the sample size: {first} vs {other}")]
    MixedSampleSizes { first: usize, other: usize },

    #[error("prior is invalid: {0}")]
    InvalidPrior(String),

    #[error("prior assigns zero mass to every model with positive weight")]
    DegeneratePrior,

    #[error("invalid cluster count {k} for {n} observations")]
    InvalidK { k: usize, n: usize },

    #[error("k = {k} exceeds the number of observations {n}")]
    KTooLarge { k: usize, n: usize },

    #[error("data has zero variance in every dimension")]
    DegenerateData,

    #[error("cannot place {k} centres in {d} dimension(s) at separation {separation}")]
    InfeasibleGeometry { k: usize, d: usize, separation: f64 },

    #[error("k range {lo}..={hi} must lie within 2..={max}")]
    InvalidRange { lo: usize, hi: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model `{model_id}`: {source}")]
    Model {
        model_id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn for_model(self, model_id: &str) -> Error {
        Error::Model {
            model_id: model_id.to_string(),
            source: Box::new(self),
        }
    }
}
