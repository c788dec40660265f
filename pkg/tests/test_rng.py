from src.core.rng import KeyedStreams


def test_same_address_same_stream():
    first = KeyedStreams(5).generator("coin", 1, 2).random(4)
    second = KeyedStreams(5).generator("coin", 1, 2).random(4)
    assert first.tolist() == second.tolist()


def test_addresses_are_independent():
    streams = KeyedStreams(5)
    assert streams.generator("coin").random() != streams.generator("z-draw").random()
    assert streams.generator("z-draw", 0).random() != streams.generator("z-draw", 1).random()


def test_consumption_order_does_not_matter():
    streams = KeyedStreams(9)
    a_first = streams.generator("a").random()
    streams.generator("b").random(100)
    assert streams.generator("a").random() == a_first


def test_child_seed():
    seed = KeyedStreams(3).child_seed("local-search")
    assert seed == KeyedStreams(3).child_seed("local-search")
    assert 0 <= seed < 2 ** 64
    assert seed != KeyedStreams(4).child_seed("local-search")


def test_negative_seed_is_masked():
    assert KeyedStreams(-1).seed == 2 ** 64 - 1
