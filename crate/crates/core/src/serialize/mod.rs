//! State and trace formats: packed binary, readable text, observation
//! tensors and action traces.

mod binary;
mod tensor;
mod text;
mod trace;

pub use binary::{from_binary, to_binary, DecodeError};
pub use tensor::{observation_tensor, tensor_size, value_tensor_width, OneHotGroup};
pub use text::{from_text, to_text, TextError};
pub use trace::{parse_action, parse_trace, print_trace, TraceParseError};
