/// Error with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_EXEC: u8 = 4;
pub const EXIT_ACCEPTANCE: u8 = 5;

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn config(m: impl Into<String>) -> Self {
        Self::new(EXIT_CONFIG, m)
    }

    pub fn io(m: impl Into<String>) -> Self {
        Self::new(EXIT_IO, m)
    }

    pub fn exec(m: impl Into<String>) -> Self {
        Self::new(EXIT_EXEC, m)
    }

    pub fn acceptance(m: impl Into<String>) -> Self {
        Self::new(EXIT_ACCEPTANCE, m)
    }
}
