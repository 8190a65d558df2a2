//! Named builtin systems.
