#pragma once

#include "hebbcl/checkpoint.hpp"
#include "hebbcl/config.hpp"
#include "hebbcl/datasets.hpp"
#include "hebbcl/errors.hpp"
#include "hebbcl/evaluation.hpp"
#include "hebbcl/experiment.hpp"
#include "hebbcl/matrix.hpp"
#include "hebbcl/network.hpp"
#include "hebbcl/report.hpp"
#include "hebbcl/supervised.hpp"
#include "hebbcl/unsupervised.hpp"
#include "hebbcl/util.hpp"
#include "hebbcl/visualization.hpp"
