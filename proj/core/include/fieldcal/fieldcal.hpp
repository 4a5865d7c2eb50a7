#pragma once

#include "fieldcal/dense_solver.hpp"
#include "fieldcal/errors.hpp"
#include "fieldcal/field_io.hpp"
#include "fieldcal/heatmap.hpp"
#include "fieldcal/kernel.hpp"
#include "fieldcal/lowrank_solver.hpp"
#include "fieldcal/pipeline.hpp"
#include "fieldcal/synth.hpp"
#include "fieldcal/types.hpp"
