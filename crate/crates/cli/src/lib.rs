// Copyright 2026 The dampest Authors
// SPDX-License-Identifier: Apache-2.0

//! Table builders and output formatting behind the `dampest` binary.

pub mod commands;
pub mod table;
