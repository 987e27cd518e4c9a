/*!
  \file lutcnn.hpp
  \brief Umbrella header
*/

#pragma once

#include "architectures.hpp"
#include "bit_vector.hpp"
#include "config_search.hpp"
#include "cost_model.hpp"
#include "decompose.hpp"
#include "emit_vhdl.hpp"
#include "error.hpp"
#include "ir.hpp"
#include "model_io.hpp"
#include "netlist.hpp"
#include "reference.hpp"
#include "report.hpp"
#include "simulate.hpp"
#include "transform.hpp"
#include "truth_table.hpp"
#include "verify.hpp"
