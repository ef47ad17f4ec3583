#pragma once

#include "cate/data.hpp"
#include "cate/dgp.hpp"
#include "cate/error.hpp"
#include "cate/estimators.hpp"
#include "cate/eval.hpp"
#include "cate/learner_config.hpp"
#include "cate/logistic.hpp"
#include "cate/metalearners.hpp"
#include "cate/mlp.hpp"
#include "cate/pseudo.hpp"
#include "cate/ridge.hpp"
#include "cate/serialize.hpp"
#include "cate/train.hpp"
#include "cate/two_head.hpp"
#include "cate/types.hpp"
