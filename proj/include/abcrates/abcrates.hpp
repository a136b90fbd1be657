#pragma once

#include "abcrates/adjust.hpp"
#include "abcrates/analysis.hpp"
#include "abcrates/core.hpp"
#include "abcrates/engine.hpp"
#include "abcrates/errors.hpp"
#include "abcrates/experiments.hpp"
#include "abcrates/io.hpp"
#include "abcrates/models.hpp"
#include "abcrates/rng.hpp"
#include "abcrates/theory.hpp"
#include "abcrates/version.hpp"
