use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed edge list at line {line}: {msg}")]
    EdgeList { line: usize, msg: String },

    #[error("vertex id {id} out of range (num_vertices = {num_vertices})")]
    VertexRange { id: u64, num_vertices: u64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("semantic error: {0}")]
    Semantic(String),

    #[error("illegal dataflow: {0}")]
    IllegalDataflow(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("pipeline composition error: {0}")]
    Composition(String),

    #[error("instance too large for replay: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
