package demo.ensemble;

import java.io.File;
import java.util.ArrayList;
import java.util.List;

public class ModelList {
    private File modelListFile;
    private final List<String> models = new ArrayList<>();

    /** gets the model list file */
    public File getModelListFile() {
        return modelListFile;
    }

    /**
     * Sets the model list file that holds the list of models.
     */
    public void setModelListFile(File modelListFile) {
        this.modelListFile = modelListFile;
    }

    // add a model name to the list of models
    public void addModel(String name) {
        if (name != null && !models.contains(name)) {
            models.add(name);
        }
    }

    /* number of models in the list */
    public int size() {
        return models.size();
    }
}
