#pragma once

#include "cetm/checkpoint.hpp"
#include "cetm/cluster.hpp"
#include "cetm/corpus.hpp"
#include "cetm/error.hpp"
#include "cetm/io.hpp"
#include "cetm/lda.hpp"
#include "cetm/manifest.hpp"
#include "cetm/metrics.hpp"
#include "cetm/model.hpp"
#include "cetm/optim.hpp"
#include "cetm/planted.hpp"
#include "cetm/sgns.hpp"
#include "cetm/training.hpp"
