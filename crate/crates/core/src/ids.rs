//! Identifier newtypes for roles, admin roles and admin users.

use std::borrow::Borrow;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Returns a reason when `name` is not usable as an identifier.
///
/// Identifiers are non-empty, printable, and carry no leading or trailing
/// whitespace. Interior spaces are accepted so that names such as
/// `IT Director` can be used verbatim.
pub fn check_name(name: &str) -> Option<&'static str> {
    if name.is_empty() {
        Some("identifier is empty")
    } else if name.trim() != name {
        Some("identifier has leading or trailing whitespace")
    } else if name.chars().any(|c| c.is_control()) {
        Some("identifier contains control characters")
    } else {
        None
    }
}

macro_rules! ident {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(name: impl Into<String>) -> Self {
                Self(name.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

ident!(
    /// A regular or administrative role.
    RoleId
);
ident!(
    /// An administrative user.
    UserId
);
