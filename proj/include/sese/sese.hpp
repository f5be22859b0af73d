#pragma once

#include <sese/centrality.hpp>
#include <sese/claims.hpp>
#include <sese/entropy.hpp>
#include <sese/eval.hpp>
#include <sese/graph.hpp>
#include <sese/io.hpp>
#include <sese/providers.hpp>
#include <sese/semantic_graph.hpp>
#include <sese/sentence.hpp>
#include <sese/wire.hpp>
