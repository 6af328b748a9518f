#pragma once

// Whole library except the verification harness.

#include "dnclab/catalog.hpp"
#include "dnclab/condition.hpp"
#include "dnclab/dnc.hpp"
#include "dnclab/errors.hpp"
#include "dnclab/filtration.hpp"
#include "dnclab/fixtures.hpp"
#include "dnclab/flag.hpp"
#include "dnclab/geometry.hpp"
#include "dnclab/linalg.hpp"
#include "dnclab/operator.hpp"
#include "dnclab/random.hpp"
#include "dnclab/serialization.hpp"
#include "dnclab/subspace.hpp"
#include "dnclab/transversality.hpp"
