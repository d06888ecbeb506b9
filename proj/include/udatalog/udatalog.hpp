// Copyright 2026 the udatalog authors
// SPDX-License-Identifier: Apache-2.0
//
// Convenience include pulling in the whole library: terms and rules, the
// parser and printer, constraint solving, program analysis, the marking
// evaluator, the update phase, and the unfolding precompiler.

#pragma once

#include "udatalog/analysis.hpp"
#include "udatalog/ast.hpp"
#include "udatalog/constraints.hpp"
#include "udatalog/eval.hpp"
#include "udatalog/parser.hpp"
#include "udatalog/transaction.hpp"
#include "udatalog/unfold.hpp"
