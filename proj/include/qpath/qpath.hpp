#pragma once

#include "qpath/config.hpp"
#include "qpath/constants.hpp"
#include "qpath/dimension.hpp"
#include "qpath/errors.hpp"
#include "qpath/experiment.hpp"
#include "qpath/gaussian_state.hpp"
#include "qpath/nonselective.hpp"
#include "qpath/oracle_grid.hpp"
#include "qpath/random.hpp"
#include "qpath/result_table.hpp"
#include "qpath/selective.hpp"
#include "qpath/validation.hpp"
#include "qpath/version.hpp"
