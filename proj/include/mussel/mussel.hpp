#pragma once

#include "mussel/error.hpp"
#include "mussel/model.hpp"
#include "mussel/roots.hpp"
#include "mussel/parallel.hpp"
#include "mussel/linear_analysis.hpp"
#include "mussel/delay_analysis.hpp"
#include "mussel/normal_form.hpp"
#include "mussel/simulator.hpp"
#include "mussel/verification.hpp"
#include "mussel/oracle_suite.hpp"
#include "mussel/config.hpp"
#include "mussel/report.hpp"
#include "mussel/cli.hpp"
