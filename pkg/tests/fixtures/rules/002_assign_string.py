name = "ada"
